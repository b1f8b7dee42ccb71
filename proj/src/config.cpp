#include "mvreg/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <set>

#include "internal.hpp"

namespace mvreg {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <class T>
T parse_value(std::string_view key, std::string_view v) {
  T out{};
  if (!v.empty() && v.front() == '+') v.remove_prefix(1);
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    throw Error(ErrorCode::InvalidConfig, "bad value '" + std::string(v) + "' for " + std::string(key));
  return out;
}

std::vector<EdgeKey> parse_edges(std::string_view key, std::string_view v) {
  std::vector<EdgeKey> out;
  std::string text(v);
  for (char& c : text)
    if (c == ',') c = ' ';
  std::size_t k = 0;
  while (k < text.size()) {
    while (k < text.size() && text[k] == ' ') ++k;
    const std::size_t start = k;
    while (k < text.size() && text[k] != ' ') ++k;
    if (k == start) break;
    const std::string_view tok = std::string_view(text).substr(start, k - start);
    const auto dash = tok.find('-');
    if (dash == std::string_view::npos)
      throw Error(ErrorCode::InvalidConfig, "edge '" + std::string(tok) + "' in " + std::string(key) + " is not i-j");
    out.emplace_back(parse_value<int>(key, tok.substr(0, dash)), parse_value<int>(key, tok.substr(dash + 1)));
  }
  return out;
}

using Setter = std::function<void(PipelineConfig&, std::string_view key, std::string_view value)>;

const std::map<std::string_view, Setter>& setters() {
  static const std::map<std::string_view, Setter> table{
      {"outer_iterations", [](auto& c, auto k, auto v) { c.outer_iterations = parse_value<int>(k, v); }},
      {"sync_rounds", [](auto& c, auto k, auto v) { c.sync_rounds = parse_value<int>(k, v); }},
      {"tau_p", [](auto& c, auto k, auto v) { c.tau_p = parse_value<double>(k, v); }},
      {"temperature", [](auto& c, auto k, auto v) { c.temperature = parse_value<double>(k, v); }},
      {"gamma", [](auto& c, auto k, auto v) { c.gamma = parse_value<double>(k, v); }},
      {"beta", [](auto& c, auto k, auto v) { c.beta = parse_value<double>(k, v); }},
      {"w_thresh", [](auto& c, auto k, auto v) { c.w_thresh = parse_value<double>(k, v); }},
      {"inner_irls", [](auto& c, auto k, auto v) { c.inner_irls = parse_value<int>(k, v); }},
      {"blend", [](auto& c, auto k, auto v) { c.blend = parse_value<double>(k, v); }},
      {"steepness", [](auto& c, auto k, auto v) { c.confidence.steepness = parse_value<double>(k, v); }},
      {"inlier_midpoint", [](auto& c, auto k, auto v) { c.confidence.inlier_midpoint = parse_value<double>(k, v); }},
      {"residual_scale", [](auto& c, auto k, auto v) { c.confidence.residual_scale = parse_value<double>(k, v); }},
      {"connectivity", [](auto& c, auto k, auto v) { c.connectivity = parse_edges(k, v); }},
      {"threads", [](auto& c, auto k, auto v) { c.threads = parse_value<int>(k, v); }},
  };
  return table;
}

}  // namespace

PipelineConfig parse_config(std::string_view text, PipelineConfig base) {
  std::set<std::string, std::less<>> seen;
  int number = 0;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++number;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(number) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw Error(ErrorCode::InvalidConfig, where + "expected key = value");
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw Error(ErrorCode::InvalidConfig, where + "unknown key '" + std::string(key) + "'");
    if (!seen.emplace(key).second) throw Error(ErrorCode::InvalidConfig, where + "repeated key '" + std::string(key) + "'");
    try {
      it->second(base, key, value);
    } catch (const Error& e) {
      throw Error(ErrorCode::InvalidConfig, where + e.detail());
    }
  }
  try {
    base.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::InvalidConfig, e.detail());
  }
  return base;
}

PipelineConfig read_config(const std::filesystem::path& path, PipelineConfig base) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_config(text, std::move(base));
}

std::string format_config(const PipelineConfig& cfg) {
  using detail::format_exact;
  std::string out;
  out += "outer_iterations = " + std::to_string(cfg.outer_iterations) + "\n";
  out += "sync_rounds = " + std::to_string(cfg.sync_rounds) + "\n";
  out += "tau_p = " + format_exact(cfg.tau_p) + "\n";
  out += "temperature = " + format_exact(cfg.temperature) + "\n";
  out += "gamma = " + format_exact(cfg.gamma) + "\n";
  out += "beta = " + format_exact(cfg.beta) + "\n";
  out += "w_thresh = " + format_exact(cfg.w_thresh) + "\n";
  out += "inner_irls = " + std::to_string(cfg.inner_irls) + "\n";
  out += "blend = " + format_exact(cfg.blend) + "\n";
  out += "steepness = " + format_exact(cfg.confidence.steepness) + "\n";
  out += "inlier_midpoint = " + format_exact(cfg.confidence.inlier_midpoint) + "\n";
  out += "residual_scale = " + format_exact(cfg.confidence.residual_scale) + "\n";
  if (cfg.connectivity) {
    out += "connectivity =";
    for (const auto& [i, j] : *cfg.connectivity) out += " " + std::to_string(i) + "-" + std::to_string(j);
    out += "\n";
  }
  out += "threads = " + std::to_string(cfg.threads) + "\n";
  return out;
}

}  // namespace mvreg
