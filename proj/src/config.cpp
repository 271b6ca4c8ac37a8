#include "dslga/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "dslga/errors.hpp"
#include "dslga/io.hpp"

namespace dslga {

void PipelineConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ParameterError(what);
  };
  require(eps1_v > eps2_v && eps2_v > 0, "need eps1_v > eps2_v > 0");
  require(eps1_i > eps2_i && eps2_i > 0, "need eps1_i > eps2_i > 0");
  require(min_pts >= 1, "min_pts must be >= 1");
  require(min_cluster_size >= 1, "min_cluster_size must be >= 1");
  require(alpha >= 0 && alpha <= 1, "alpha must lie in [0, 1]");
  require(beta >= 0 && beta <= 1, "beta must lie in [0, 1]");
  require(rho > 0, "rho must be > 0");
  require(tau > 0, "tau must be > 0");
  require(psi >= 0, "psi must be >= 0");
  require(k_reciprocal >= 1, "k_reciprocal must be >= 1");
  require(contrastive_temperature > 0, "contrastive_temperature must be > 0");
  require(max_pair_cost > 0, "max_pair_cost must be > 0");
}

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& v, int line) {
  try {
    std::size_t pos = 0;
    if (v == "inf") return std::numeric_limits<double>::infinity();
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw MetadataParseError("bad numeric value '" + v + "'", line);
  }
}

int parse_int(const std::string& v, int line) {
  try {
    std::size_t pos = 0;
    const int d = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw MetadataParseError("bad integer value '" + v + "'", line);
  }
}

bool parse_bool(const std::string& v, int line) {
  if (v == "true" || v == "1" || v == "on") return true;
  if (v == "false" || v == "0" || v == "off") return false;
  throw MetadataParseError("bad boolean value '" + v + "'", line);
}

}  // namespace

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileError("cannot open " + path);
  PipelineConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw MetadataParseError("expected key = value", line_no);
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    if (key == "eps1_v") cfg.eps1_v = parse_double(value, line_no);
    else if (key == "eps2_v") cfg.eps2_v = parse_double(value, line_no);
    else if (key == "eps1_i") cfg.eps1_i = parse_double(value, line_no);
    else if (key == "eps2_i") cfg.eps2_i = parse_double(value, line_no);
    else if (key == "min_pts") cfg.min_pts = parse_int(value, line_no);
    else if (key == "min_cluster_size") cfg.min_cluster_size = parse_int(value, line_no);
    else if (key == "alpha") cfg.alpha = parse_double(value, line_no);
    else if (key == "beta") cfg.beta = parse_double(value, line_no);
    else if (key == "rho") cfg.rho = parse_double(value, line_no);
    else if (key == "tau") cfg.tau = parse_double(value, line_no);
    else if (key == "psi") cfg.psi = parse_double(value, line_no);
    else if (key == "k_reciprocal") cfg.k_reciprocal = parse_int(value, line_no);
    else if (key == "contrastive_temperature") cfg.contrastive_temperature = parse_double(value, line_no);
    else if (key == "cmcc_active") cfg.cmcc_active = parse_bool(value, line_no);
    else if (key == "max_pair_cost") cfg.max_pair_cost = parse_double(value, line_no);
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(std::stoull(value));
    else if (key == "cmcc_kl") {
      if (value == "center") cfg.kl_mode = CmccKlMode::center_to_center;
      else if (value == "pairwise") cfg.kl_mode = CmccKlMode::pairwise_mean;
      else throw MetadataParseError("cmcc_kl must be center or pairwise", line_no);
    } else {
      throw MetadataParseError("unknown config key '" + key + "'", line_no);
    }
  }
  return cfg;
}

std::string config_to_text(const PipelineConfig& cfg) {
  std::ostringstream out;
  out.precision(17);
  out << "# pipeline configuration\n";
  out << "eps1_v = " << cfg.eps1_v << "\n";
  out << "eps2_v = " << cfg.eps2_v << "\n";
  out << "eps1_i = " << cfg.eps1_i << "\n";
  out << "eps2_i = " << cfg.eps2_i << "\n";
  out << "min_pts = " << cfg.min_pts << "\n";
  out << "min_cluster_size = " << cfg.min_cluster_size << "\n";
  out << "alpha = " << cfg.alpha << "\n";
  out << "beta = " << cfg.beta << "\n";
  out << "rho = " << cfg.rho << "\n";
  out << "tau = " << cfg.tau << "\n";
  out << "psi = " << cfg.psi << "\n";
  out << "k_reciprocal = " << cfg.k_reciprocal << "\n";
  out << "contrastive_temperature = " << cfg.contrastive_temperature << "\n";
  out << "cmcc_active = " << (cfg.cmcc_active ? "true" : "false") << "\n";
  out << "cmcc_kl = "
      << (cfg.kl_mode == CmccKlMode::center_to_center ? "center" : "pairwise")
      << "\n";
  if (std::isfinite(cfg.max_pair_cost)) {
    out << "max_pair_cost = " << cfg.max_pair_cost << "\n";
  } else {
    out << "max_pair_cost = inf\n";
  }
  out << "seed = " << cfg.seed << "\n";
  return out.str();
}

void save_config(const PipelineConfig& cfg, const std::string& path) {
  write_text_file(config_to_text(cfg), path);
}

}  // namespace dslga
