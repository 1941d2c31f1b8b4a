#include <cmath>
#include <cstdlib>
#include <charconv>

#include "modelio/modelio.hpp"
#include "util/error.hpp"
#include "util/text.hpp"

namespace mecw::model {

double DegradationProfile::probability(double tokens) const {
  double z = (static_cast<double>(t0) - tokens) / static_cast<double>(w);
  double logistic = z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
  return p_low + (p_high - p_low) * logistic;
}

void validate(const DegradationProfile& p) {
  if (!(p.p_low >= 0.0 && p.p_low <= p.p_high && p.p_high <= 1.0))
    fail(ErrorCode::invalid_argument, "profile: need 0 <= p_low <= p_high <= 1");
  if (p.t0 <= 0 || p.w <= 0) fail(ErrorCode::invalid_argument, "profile: t0 and w must be positive");
}

DegradationProfile parse_profile(std::string_view spec) {
  DegradationProfile p;
  bool have_t0 = false, have_w = false;
  std::string_view rest = spec;
  while (!rest.empty()) {
    auto comma = rest.find(',');
    std::string_view part = text::trim(rest.substr(0, comma));
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    auto eq = part.find('=');
    if (eq == std::string_view::npos) fail(ErrorCode::parse, "profile: expected key=value, got '" + std::string(part) + "'");
    std::string key(text::trim(part.substr(0, eq)));
    std::string value(text::trim(part.substr(eq + 1)));
    char* end = nullptr;
    double v = std::strtod(value.c_str(), &end);
    if (value.empty() || end != value.c_str() + value.size() || !std::isfinite(v))
      fail(ErrorCode::parse, "profile: bad number for '" + key + "'");
    auto as_int = [&]() {
      if (v != std::floor(v)) fail(ErrorCode::parse, "profile: '" + key + "' must be an integer");
      return static_cast<std::int64_t>(v);
    };
    if (key == "t0") p.t0 = as_int(), have_t0 = true;
    else if (key == "w") p.w = as_int(), have_w = true;
    else if (key == "ph" || key == "p_high") p.p_high = v;
    else if (key == "pl" || key == "p_low") p.p_low = v;
    else fail(ErrorCode::parse, "profile: unknown key '" + key + "'");
  }
  if (!have_t0 || !have_w) fail(ErrorCode::parse, "profile: t0 and w are required");
  validate(p);
  return p;
}

std::string format_profile(const DegradationProfile& p) {
  auto shortest = [](double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
  };
  return "t0=" + std::to_string(p.t0) + ",w=" + std::to_string(p.w) + ",ph=" + shortest(p.p_high) +
         ",pl=" + shortest(p.p_low);
}

const DegradationProfile& SimulationSpec::for_task(tasks::TaskType task) const {
  auto it = per_task.find(task);
  return it == per_task.end() ? default_profile : it->second;
}

SimulationSpec parse_simulation(const std::vector<std::string>& profiles) {
  if (profiles.empty()) fail(ErrorCode::invalid_argument, "at least one simulation profile is required");
  SimulationSpec spec;
  bool have_default = false;
  std::optional<DegradationProfile> first_tagged;
  for (const auto& entry : profiles) {
    auto colon = entry.find(':');
    if (colon == std::string::npos) {
      if (have_default) fail(ErrorCode::invalid_argument, "more than one untagged simulation profile");
      spec.default_profile = parse_profile(entry);
      have_default = true;
      continue;
    }
    auto task = tasks::parse_task(text::trim(std::string_view(entry).substr(0, colon)));
    if (!task) fail(ErrorCode::invalid_argument, "unknown task in profile '" + entry + "'");
    if (spec.per_task.count(*task)) fail(ErrorCode::invalid_argument, "duplicate profile for task '" + entry + "'");
    auto profile = parse_profile(std::string_view(entry).substr(colon + 1));
    spec.per_task[*task] = profile;
    if (!first_tagged) first_tagged = profile;
  }
  if (!have_default) spec.default_profile = *first_tagged;
  return spec;
}

TokenCount count_tokens(std::string_view text, std::optional<std::int64_t> reported) {
  if (reported) return {*reported, TokenSource::reported};
  auto chars = static_cast<std::int64_t>(text::utf8_length(text));
  return {(chars + 3) / 4, TokenSource::estimated};
}

std::string_view to_string(TokenSource source) {
  return source == TokenSource::reported ? "reported" : "estimated";
}

std::string_view to_string(TransportStatus status) {
  switch (status) {
    case TransportStatus::ok: return "ok";
    case TransportStatus::retryable_failure: return "retryable_failure";
    case TransportStatus::fatal_failure: return "fatal_failure";
  }
  return "?";
}

}  // namespace mecw::model
