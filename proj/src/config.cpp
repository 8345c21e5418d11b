#include "ncheat/config.hpp"

#include <chrono>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "ncheat/errors.hpp"

namespace ncheat {

const std::map<std::string, std::string>& Config::defaults() {
  static const std::map<std::string, std::string> d = {
      // truncated matrix model
      {"model.n", "48"},
      {"model.n_pad", "96"},
      {"model.h", "1.0"},
      {"model.quad_order", "20"},
      {"model.tol_leak", "1e-6"},
      {"heat.dt_max", "1.0"},
      {"heat.tauberian_t_min", "0.5"},
      {"heat.tauberian_t_max", "30"},
      {"heat.tauberian_points", "16"},
      // nonlinearity verification
      {"doi.p_list", "1.5,2,2.7,4"},
      {"doi.q_list", "1,2,3,inf"},
      {"doi.trials", "250"},
      {"doi.dim", "12"},
      {"doi.seed", "20250801"},
      {"doi.cp_extent", "40"},
      {"doi.cp_samples", "16384"},
      // operator Jensen
      {"jensen.trials", "200"},
      {"jensen.dim", "6"},
      {"jensen.n_kraus", "3"},
      {"jensen.seed", "911"},
      {"jensen.heat_t_list", "0.1,0.5,1"},
      {"jensen.heat_n", "32"},
      {"jensen.heat_n_pad", "64"},
      // sweeps; empty string means the per-model default
      {"sweep.model", "classical-d1"},
      {"sweep.p_grid", ""},
      {"sweep.amplitude_grid", ""},
      {"sweep.horizon", "0"},
      {"sweep.seed", "20240817"},
      {"sweep.t0", "0"},
      {"sweep.ceiling_factor", "1e6"},
      {"sweep.dt0", "0.05"},
      {"sweep.dt_max", "0.8"},
      {"sweep.q_override", "0"},
      {"sweep.decay_slope_tol", "0.05"},
      {"sweep.cert_grid_points", "12"},
      {"sweep.cert_fracs", ""},
      {"sweep.dt_safety", "0.25"},
      // per-model sweep defaults
      {"matrix2.p_grid", "1.5,2,2.5,3"},
      {"matrix2.amplitude_grid", "1,3"},
      {"matrix2.horizon", "50"},
      {"matrix2.t0", "0.5"},
      {"matrix2.cert_fracs", "0"},
      {"classical-d1.box", "1250"},
      {"classical-d1.n", "8192"},
      {"classical-d1.p_grid", "1.8,2.2,2.6,3,3.4,3.8"},
      {"classical-d1.amplitude_grid", "0.3,1,3"},
      {"classical-d1.horizon", "5000"},
      {"classical-d1.t0", "1"},
      {"classical-d1.cert_fracs", "0,0.25,0.5"},
      {"classical-d2.box", "256"},
      {"classical-d2.n", "512"},
      {"classical-d2.p_grid", "1.6,2,2.4,2.8"},
      {"classical-d2.amplitude_grid", "0.7,2"},
      {"classical-d2.horizon", "200"},
      {"classical-d2.t0", "1"},
      {"classical-d2.cert_fracs", "0,0.5"},
      {"classical-d3.box", "64"},
      {"classical-d3.n", "128"},
      {"classical-d3.p_grid", "1.5,1.8,2.1"},
      {"classical-d3.amplitude_grid", "1"},
      {"classical-d3.horizon", "60"},
      {"classical-d3.t0", "1"},
      {"classical-d3.cert_fracs", "0,0.5"},
      // certificates
      {"certify.model", "matrix2"},
      {"certify.p", "1.5"},
      {"certify.amplitude", "1"},
      {"certify.t0", "0.5"},
      {"certify.t_min", "0.1"},
      {"certify.t_max", "50"},
      {"certify.points", "24"},
  };
  return d;
}

Config::Config() : values_(defaults()) {}

void Config::set(const std::string& key, const std::string& value) {
  if (!defaults().count(key)) throw Error("config: unknown key '" + key + "'");
  values_[key] = value;
}

void Config::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("config: cannot open '" + path + "'");
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw Error("config: line " + std::to_string(lineno) + " is not key = value");
    set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
}

std::string Config::get_string(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw Error("config: unknown key '" + key + "'");
  return it->second;
}

double Config::get_double(const std::string& key) const {
  const std::string s = get_string(key);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str()) throw Error("config: key '" + key + "' is not a number");
  return v;
}

int Config::get_int(const std::string& key) const {
  return static_cast<int>(get_double(key));
}

uint64_t Config::get_u64(const std::string& key) const {
  return std::strtoull(get_string(key).c_str(), nullptr, 10);
}

std::vector<double> Config::get_list(const std::string& key) const {
  const std::string s = get_string(key);
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto a = item.find_first_not_of(" \t");
    if (a == std::string::npos) continue;
    const auto b = item.find_last_not_of(" \t");
    const std::string tok = item.substr(a, b - a + 1);
    if (tok == "inf" || tok == "infinity")
      out.push_back(std::numeric_limits<double>::infinity());
    else
      out.push_back(std::strtod(tok.c_str(), nullptr));
  }
  return out;
}

uint64_t fnv1a(const std::string& data) {
  uint64_t h = 14695981039346656037ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string timestamp_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string RunManifest::to_json() const {
  nlohmann::json j;
  j["subcommand"] = subcommand;
  j["version"] = version;
  j["master_seed"] = master_seed;
  j["started_at"] = started_at;
  j["finished_at"] = finished_at;
  j["config"] = config_snapshot;
  nlohmann::json suites_j = nlohmann::json::array();
  for (const auto& s : suites)
    suites_j.push_back({{"name", s.name}, {"passed", s.passed}, {"failed", s.failed}});
  j["suites"] = suites_j;
  nlohmann::json outs = nlohmann::json::array();
  for (const auto& [path, hash] : outputs) outs.push_back({{"path", path}, {"body_fnv1a", hash}});
  j["outputs"] = outs;
  return j.dump(2) + "\n";
}

void RunManifest::write(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error("manifest: cannot write '" + path + "'");
  out << to_json();
}

}  // namespace ncheat
