#include "bdsde/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace bdsde {

std::vector<std::string> known_studies() {
  return {"solve-finite", "solve-infinite", "picard-study",     "mode-study",
          "horizon-study", "stationarity",  "weakform",         "validate",
          "ou-oracle",     "continuity-study"};
}

namespace {

const std::vector<std::string> kKnownDrivers = {"ou", "ou_space", "picard_bench", "mode_bench"};

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

bool parse_double(const std::string& s, double& out) {
  try {
    std::size_t used = 0;
    out = std::stod(s, &used);
    return used == s.size();
  } catch (...) {
    return false;
  }
}

bool parse_list(const std::string& s, std::vector<double>& out) {
  out.clear();
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    double v;
    if (!parse_double(trim(item), v)) return false;
    out.push_back(v);
  }
  return !out.empty();
}

}  // namespace

std::string ExperimentConfig::canonical() const {
  std::ostringstream out;
  out.precision(17);
  out << "study=" << study << "\ndriver=" << driver << '\n';
  for (const auto& [k, v] : problem) out << "problem." << k << '=' << v << '\n';
  out << "K=" << K << "\np=" << p << "\nq=" << q << "\nC=" << C << "\nmu=" << mu << "\nL=" << L
      << '\n';
  auto list = [&](const char* name, const std::vector<double>& xs) {
    out << name << '=';
    for (double x : xs) out << x << ',';
    out << '\n';
  };
  list("Cj", Cj);
  list("alphaj", alphaj);
  out << "dt=" << dt << "\nhorizon=" << horizon << '\n';
  list("horizons", horizons);
  out << "relax=" << relax << "\nM=" << inner_samples << "\nJ=" << modes << "\nd=" << dim
      << "\nR=" << radius << "\nnodes=" << nodes << "\nseed=" << master_seed
      << "\nseeds=" << seed_count << "\ntol=" << tol << "\nmax_iter=" << max_iter
      << "\noverride=" << override_conditions << "\nstride=" << export_stride << '\n';
  return out.str();
}

ParseResult parse_config_text(const std::string& text) {
  ParseResult result;
  ExperimentConfig& cfg = result.config;
  auto& errs = result.violations;

  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      errs.push_back("line " + std::to_string(line_no) + ": expected key = value");
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    auto bad_value = [&] {
      errs.push_back("key '" + key + "': cannot parse value '" + value + "'");
    };
    auto as_double = [&](double& slot) {
      double v;
      if (parse_double(value, v))
        slot = v;
      else
        bad_value();
    };
    auto as_int = [&](int& slot) {
      double v;
      if (parse_double(value, v) && std::abs(v - std::llround(v)) < 1e-12)
        slot = static_cast<int>(std::llround(v));
      else
        bad_value();
    };

    if (key == "study") {
      cfg.study = value;
    } else if (key == "problem.driver") {
      cfg.driver = value;
    } else if (key.rfind("problem.", 0) == 0) {
      double v;
      if (parse_double(value, v))
        cfg.problem[key.substr(8)] = v;
      else
        bad_value();
    } else if (key == "constants.K") {
      as_double(cfg.K);
    } else if (key == "constants.p") {
      as_double(cfg.p);
    } else if (key == "constants.q") {
      as_double(cfg.q);
    } else if (key == "constants.C") {
      as_double(cfg.C);
    } else if (key == "constants.mu") {
      as_double(cfg.mu);
    } else if (key == "constants.L") {
      as_double(cfg.L);
    } else if (key == "constants.Cj") {
      if (!parse_list(value, cfg.Cj)) bad_value();
    } else if (key == "constants.alphaj") {
      if (!parse_list(value, cfg.alphaj)) bad_value();
    } else if (key == "disc.dt") {
      as_double(cfg.dt);
    } else if (key == "disc.horizon") {
      as_double(cfg.horizon);
    } else if (key == "disc.horizons") {
      if (!parse_list(value, cfg.horizons)) bad_value();
    } else if (key == "disc.relax") {
      as_double(cfg.relax);
    } else if (key == "disc.M") {
      as_int(cfg.inner_samples);
    } else if (key == "noise.J") {
      as_int(cfg.modes);
    } else if (key == "grid.d") {
      as_int(cfg.dim);
    } else if (key == "grid.R") {
      as_double(cfg.radius);
    } else if (key == "grid.nodes") {
      as_int(cfg.nodes);
    } else if (key == "seeds.master") {
      double v;
      if (parse_double(value, v) && v >= 0)
        cfg.master_seed = static_cast<std::uint64_t>(v);
      else
        bad_value();
    } else if (key == "seeds.count") {
      as_int(cfg.seed_count);
    } else if (key == "run.tol") {
      as_double(cfg.tol);
    } else if (key == "run.max_iter") {
      as_int(cfg.max_iter);
    } else if (key == "run.override_conditions") {
      int v = 0;
      as_int(v);
      cfg.override_conditions = v != 0;
    } else if (key == "run.threads") {
      as_int(cfg.threads);
    } else if (key == "out.stride") {
      as_int(cfg.export_stride);
    } else if (key == "output_dir") {
      cfg.output_dir = value;
    } else {
      errs.push_back("unknown key '" + key + "'");
    }
  }

  // Admissibility checks; every violation is reported, not just the first.
  const auto studies = known_studies();
  if (cfg.study.empty())
    errs.push_back("study: missing (choose one of the study names)");
  else if (std::find(studies.begin(), studies.end(), cfg.study) == studies.end())
    errs.push_back("study '" + cfg.study + "' is not a known study");
  if (std::find(kKnownDrivers.begin(), kKnownDrivers.end(), cfg.driver) == kKnownDrivers.end())
    errs.push_back("problem.driver '" + cfg.driver + "' is not a known driver");
  if (cfg.dim < 1 || cfg.dim > 2)
    errs.push_back("grid.d = " + std::to_string(cfg.dim) +
                   ": the spatial dimension is restricted to 1 or 2");
  if (!(cfg.dt > 0.0)) errs.push_back("disc.dt must be positive");
  if (cfg.nodes < 2) errs.push_back("grid.nodes must be at least 2");
  if (!(cfg.radius > 0.0)) errs.push_back("grid.R must be positive");
  if (cfg.inner_samples < 1) errs.push_back("disc.M must be at least 1");
  if (cfg.seed_count < 1) errs.push_back("seeds.count must be at least 1");
  if (!(cfg.tol > 0.0)) errs.push_back("run.tol must be positive");
  if (cfg.q > 0.0 && !(cfg.q > 3.0)) errs.push_back("constants.q must exceed 3");
  if (cfg.p > 0.0 && cfg.q > 0.0 && !(cfg.p > 2.0 && cfg.p < cfg.q - 1.0))
    errs.push_back("constants.p must lie strictly between 2 and q - 1");
  if (!cfg.alphaj.empty()) {
    double sum = 0.0;
    for (double a : cfg.alphaj) sum += a;
    if (sum >= 0.5) {
      char buf[96];
      std::snprintf(buf, sizeof buf,
                    "constants.alphaj: mode z-couplings sum to %g; they must stay below 1/2", sum);
      errs.push_back(buf);
    }
  }
  if (!cfg.horizons.empty()) {
    for (std::size_t i = 1; i < cfg.horizons.size(); ++i)
      if (cfg.horizons[i] <= cfg.horizons[i - 1]) {
        errs.push_back("disc.horizons must be strictly increasing");
        break;
      }
    for (double h : cfg.horizons)
      if (cfg.dt > 0.0 && std::abs(std::llround(h / cfg.dt) * cfg.dt - h) > 1e-9) {
        errs.push_back("disc.horizons must be multiples of disc.dt");
        break;
      }
  }
  return result;
}

ParseResult parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    ParseResult r;
    r.violations.push_back("cannot open config file '" + path + "'");
    return r;
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

}  // namespace bdsde
