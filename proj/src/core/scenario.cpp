#include "core/scenario.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <functional>
#include <set>
#include <sstream>
#include <variant>

namespace interimkm {

using nlohmann::json;
using ordered = nlohmann::ordered_json;

namespace {

std::string summarize(const std::vector<Diagnostic>& diagnostics) {
  std::ostringstream out;
  out << "invalid configuration";
  for (const auto& d : diagnostics) out << "; " << (d.path.empty() ? "/" : d.path) << ": " << d.message;
  return out.str();
}

std::string pointer_token(const std::string& key) {
  std::string out;
  for (char c : key) {
    if (c == '~') out += "~0";
    else if (c == '/') out += "~1";
    else out += c;
  }
  return out;
}

// Reads the members of one JSON object, recording a diagnostic per problem.
class ObjectReader {
 public:
  ObjectReader(const json& object, std::string path, std::vector<Diagnostic>& diagnostics)
      : object_(object), path_(std::move(path)), diagnostics_(diagnostics) {}

  std::string at(const std::string& key) const { return path_ + "/" + pointer_token(key); }
  const std::string& path() const { return path_; }
  bool has(const std::string& key) const { return object_.contains(key); }
  void error(const std::string& path, const std::string& message) {
    diagnostics_.push_back({path, message});
  }

  const json* get(const std::string& key) {
    seen_.insert(key);
    const auto it = object_.find(key);
    return it == object_.end() ? nullptr : &*it;
  }

  std::optional<double> number(const std::string& key, bool required,
                               const std::function<bool(double)>& ok = {},
                               const std::string& expected = "a number") {
    const json* v = get(key);
    if (!v) {
      if (required) error(at(key), "is required");
      return std::nullopt;
    }
    if (!v->is_number()) {
      error(at(key), "must be " + expected);
      return std::nullopt;
    }
    const double x = v->get<double>();
    if (!std::isfinite(x) || (ok && !ok(x))) {
      error(at(key), "must be " + expected);
      return std::nullopt;
    }
    return x;
  }

  std::optional<long long> integer(const std::string& key, bool required, long long min,
                                   long long max, const std::string& expected) {
    const json* v = get(key);
    if (!v) {
      if (required) error(at(key), "is required");
      return std::nullopt;
    }
    if (v->is_number_integer() || v->is_number_unsigned()) {
      if (v->is_number_unsigned() && v->get<unsigned long long>() > static_cast<unsigned long long>(max)) {
        error(at(key), "must be " + expected);
        return std::nullopt;
      }
      const long long x = v->get<long long>();
      if (x >= min && x <= max) return x;
    }
    error(at(key), "must be " + expected);
    return std::nullopt;
  }

  std::optional<std::string> text(const std::string& key, bool required,
                                  const std::vector<std::string>& choices = {}) {
    const json* v = get(key);
    if (!v) {
      if (required) error(at(key), "is required");
      return std::nullopt;
    }
    if (!v->is_string()) {
      error(at(key), "must be a string");
      return std::nullopt;
    }
    auto s = v->get<std::string>();
    if (!choices.empty() && std::find(choices.begin(), choices.end(), s) == choices.end()) {
      std::string list;
      for (const auto& c : choices) list += (list.empty() ? "" : ", ") + ("\"" + c + "\"");
      error(at(key), "must be one of " + list);
      return std::nullopt;
    }
    return s;
  }

  void reject_unknown() {
    for (const auto& item : object_.items()) {
      if (!seen_.count(item.key())) error(at(item.key()), "unknown field");
    }
  }

 private:
  const json& object_;
  std::string path_;
  std::vector<Diagnostic>& diagnostics_;
  std::set<std::string> seen_;
};

const auto positive = [](double x) { return x > 0.0; };
const auto non_negative = [](double x) { return x >= 0.0; };
const auto open_unit = [](double x) { return x > 0.0 && x < 1.0; };

std::optional<SurvivalModel> parse_survival(const json& j, const std::string& path,
                                            const std::string& default_label,
                                            std::vector<Diagnostic>& diagnostics) {
  if (!j.is_object()) {
    diagnostics.push_back({path, "must be an object"});
    return std::nullopt;
  }
  ObjectReader r(j, path, diagnostics);
  const auto family = r.text("distribution", true, {"exponential", "weibull"});
  const auto label = r.text("label", false).value_or(default_label);
  std::optional<SurvivalModel> model;
  if (family == "exponential") {
    const bool by_rate = r.has("rate");
    const bool by_median = r.has("median");
    if (by_rate == by_median) {
      r.error(path, "give exactly one of \"rate\" and \"median\"");
      r.get("rate");
      r.get("median");
    } else if (by_rate) {
      if (auto rate = r.number("rate", true, positive, "a positive number")) {
        model = SurvivalModel::exponential(*rate, label);
      }
    } else if (auto median = r.number("median", true, positive, "a positive number")) {
      model = SurvivalModel::exponential_median(*median, label);
    }
  } else if (family == "weibull") {
    const auto shape = r.number("shape", true, positive, "a positive number");
    const bool by_scale = r.has("scale");
    const bool by_median = r.has("median");
    std::optional<double> scale;
    if (by_scale == by_median) {
      r.error(path, "give exactly one of \"scale\" and \"median\"");
      r.get("scale");
      r.get("median");
    } else if (by_scale) {
      scale = r.number("scale", true, positive, "a positive number");
    } else if (auto median = r.number("median", true, positive, "a positive number"); median && shape) {
      scale = *median / std::pow(std::log(2.0), 1.0 / *shape);
    }
    if (shape && scale) model = SurvivalModel::weibull(*shape, *scale, label);
  } else {
    r.get("rate");
    r.get("median");
    r.get("shape");
    r.get("scale");
  }
  r.reject_unknown();
  return model;
}

ScenarioConfig parse_scenario(const json& j, const std::string& path, std::size_t index,
                              std::vector<Diagnostic>& diagnostics) {
  ScenarioConfig c;
  if (!j.is_object()) {
    diagnostics.push_back({path, "scenario must be an object"});
    return c;
  }
  ObjectReader r(j, path, diagnostics);
  c.id = r.text("id", false).value_or("scenario-" + std::to_string(index + 1));

  if (const json* control = r.get("control")) {
    if (auto m = parse_survival(*control, r.at("control"), "control", diagnostics)) c.control = *m;
  } else {
    r.error(r.at("control"), "is required");
  }
  if (const json* exp = r.get("experimental")) {
    c.experimental = parse_survival(*exp, r.at("experimental"), "experimental", diagnostics);
  }
  c.hazard_ratio = r.number("hazard_ratio", false, positive, "a positive number");
  if (!r.has("experimental") && !r.has("hazard_ratio")) {
    r.error(path, "give \"hazard_ratio\" or an \"experimental\" survival model");
  }
  c.allocation = r.number("allocation", false, open_unit, "a number in (0, 1)").value_or(0.5);

  if (const json* acc = r.get("accrual")) {
    if (!acc->is_object()) {
      r.error(r.at("accrual"), "must be an object");
    } else {
      ObjectReader a(*acc, r.at("accrual"), diagnostics);
      if (a.has("rate")) {
        c.accrual_rate = a.number("rate", true, positive, "a positive number");
        c.accrual_step =
            a.number("step", false, non_negative, "a non-negative number").value_or(1.0);
        if (a.has("duration") || a.has("n_total")) {
          a.error(a.path(), "give either \"rate\" or \"duration\" with \"n_total\", not both");
          a.get("duration");
          a.get("n_total");
        }
      } else {
        c.accrual_duration = a.number("duration", true, non_negative, "a non-negative number");
        if (auto n = a.integer("n_total", true, 1, 10'000'000, "a positive integer")) {
          c.n_total = static_cast<int>(*n);
        }
        c.truncate_at = a.number("truncate_at", false, non_negative, "a non-negative number");
        if (c.truncate_at && c.accrual_duration && *c.truncate_at > *c.accrual_duration) {
          a.error(a.at("truncate_at"), "must not exceed the accrual duration");
        }
      }
      a.reject_unknown();
    }
  } else {
    r.error(r.at("accrual"), "is required");
  }

  c.fu_after_last = r.number("fu_after_last", false, non_negative, "a non-negative number");
  c.alpha = r.number("alpha", false, open_unit, "a number in (0, 1)").value_or(0.05);
  c.power = r.number("power", false, open_unit, "a number in (0, 1)").value_or(0.8);
  if (auto d = r.integer("total_events", false, 1, 100'000'000, "a positive integer")) {
    c.total_events = static_cast<int>(*d);
  }
  c.information_fraction = r.number("information_fraction", false,
                                    [](double x) { return x > 0.0 && x <= 1.0; },
                                    "a number in (0, 1]");
  c.p = r.number("p", false, open_unit, "a number in (0, 1)");
  if (r.has("information_fraction") == r.has("p")) {
    r.error(path, "give exactly one of \"information_fraction\" and \"p\"");
  }
  if (const json* dec = r.get("p_decimals"); dec && dec->is_null()) {
    c.p_decimals.reset();
  } else if (dec) {
    if (auto k = r.integer("p_decimals", false, 0, 15, "an integer in [0, 15] or null")) {
      c.p_decimals = static_cast<int>(*k);
    }
  }

  if (auto mode = r.text("delta_mode", false, {"relative", "absolute"})) {
    c.delta_mode = *mode == "relative" ? DeltaSpec::Mode::relative : DeltaSpec::Mode::absolute;
  }
  if (const json* deltas = r.get("delta")) {
    if (!deltas->is_array() || deltas->empty()) {
      r.error(r.at("delta"), "must be a non-empty array of positive numbers");
    } else {
      for (std::size_t i = 0; i < deltas->size(); ++i) {
        const json& d = (*deltas)[i];
        const bool relative = c.delta_mode == DeltaSpec::Mode::relative;
        if (!d.is_number() || !(d.get<double>() > 0.0) || !std::isfinite(d.get<double>()) ||
            (relative && !(d.get<double>() < 1.0))) {
          r.error(r.at("delta") + "/" + std::to_string(i),
                  relative ? "must be a number in (0, 1)" : "must be a positive number");
        } else {
          c.deltas.push_back(d.get<double>());
        }
      }
    }
  } else {
    r.error(r.at("delta"), "is required");
  }
  c.interval_alpha =
      r.number("interval_alpha", false, open_unit, "a number in (0, 1)").value_or(0.05);
  if (auto reps = r.integer("replicates", false, 1, 100'000'000, "a positive integer")) {
    c.replicates = static_cast<int>(*reps);
  }
  if (const json* seed = r.get("seed")) {
    if (seed->is_number_unsigned() || (seed->is_number_integer() && seed->get<long long>() >= 0)) {
      c.seed = seed->get<std::uint64_t>();
    } else {
      r.error(r.at("seed"), "must be a non-negative integer");
    }
  }
  if (auto est = r.text("estimator", false, {"kaplan_meier", "breslow"})) {
    c.estimator = *est == "breslow" ? Estimator::breslow : Estimator::kaplan_meier;
  }

  if (c.accrual_rate) {
    if (!c.hazard_ratio) r.error(r.at("hazard_ratio"), "is required when accrual is given by rate");
    if (!c.fu_after_last) {
      r.error(r.at("fu_after_last"), "is required when accrual is given by rate");
    }
    if (c.allocation != 0.5) r.error(r.at("allocation"), "must be 0.5 when accrual is given by rate");
    if (c.experimental) {
      r.error(r.at("experimental"), "is derived from the hazard ratio when accrual is given by rate");
    }
  } else if (c.information_fraction && !c.hazard_ratio && !c.total_events) {
    r.error(r.at("information_fraction"), "needs \"hazard_ratio\" or \"total_events\"");
  }
  r.reject_unknown();
  return c;
}

std::string error_location(const std::string& text, std::size_t byte) {
  std::size_t line = 1, column = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

}  // namespace

ConfigError::ConfigError(std::vector<Diagnostic> diagnostics)
    : Error(ErrorCode::invalid_config, summarize(diagnostics)),
      diagnostics_(std::move(diagnostics)) {}

std::vector<ScenarioConfig> parse_scenarios(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    std::string what = e.what();
    if (const auto cut = what.find("parse error"); cut != std::string::npos) what = what.substr(cut);
    throw ConfigError({{"", "malformed JSON at " + error_location(json_text, e.byte == 0 ? 0 : e.byte - 1) +
                                ": " + what}});
  }
  std::vector<Diagnostic> diagnostics;
  std::vector<ScenarioConfig> out;
  if (root.is_object() && root.contains("scenarios")) {
    const json& list = root["scenarios"];
    for (const auto& item : root.items()) {
      if (item.key() != "scenarios") diagnostics.push_back({"/" + pointer_token(item.key()), "unknown field"});
    }
    if (!list.is_array() || list.empty()) {
      diagnostics.push_back({"/scenarios", "must be a non-empty array of scenario objects"});
    } else {
      for (std::size_t i = 0; i < list.size(); ++i) {
        out.push_back(parse_scenario(list[i], "/scenarios/" + std::to_string(i), i, diagnostics));
      }
    }
  } else {
    out.push_back(parse_scenario(root, "", 0, diagnostics));
  }
  if (!diagnostics.empty()) throw ConfigError(std::move(diagnostics));
  return out;
}

TrialDesign build_design(const ScenarioConfig& c) {
  if (c.accrual_rate) {
    DesignInputs in;
    in.hazard_ratio = *c.hazard_ratio;
    in.control = c.control;
    in.accrual_rate = *c.accrual_rate;
    in.fu_after_last = *c.fu_after_last;
    in.alpha = c.alpha;
    in.power = c.power;
    in.information_fraction = c.information_fraction;
    in.p_decimals = c.p_decimals;
    in.accrual_step = c.accrual_step;
    TrialDesign d = solve_design(in);
    if (c.total_events) {
      d.total_events = *c.total_events;
      if (c.information_fraction) {
        double p = patient_fraction(*c.information_fraction, d.total_events, d.n_total());
        if (c.p_decimals) p = round_to_decimals(p, *c.p_decimals);
        d.patient_fraction = p;
      }
    }
    if (c.p) d.patient_fraction = *c.p;
    return d;
  }

  TrialDesign d;
  SurvivalModel control = c.control;
  SurvivalModel experimental =
      c.experimental ? *c.experimental : control.scaled_hazard(*c.hazard_ratio, "experimental");
  const int n = *c.n_total;
  const int n_control = static_cast<int>(std::lround(n * c.allocation));
  require(n_control >= 1 && n_control < n, "both arms need at least one patient");
  const double q = static_cast<double>(n_control) / n;
  d.arms = {{control, q}, {experimental, 1.0 - q}};
  d.arm_sizes = {n_control, n - n_control};
  d.accrual = c.truncate_at ? AccrualModel::truncated(*c.accrual_duration, *c.truncate_at)
                            : AccrualModel::uniform(*c.accrual_duration);
  d.fu_after_last = c.fu_after_last;
  d.alpha = c.alpha;
  d.power = c.power;
  d.hazard_ratio = c.hazard_ratio;
  if (c.total_events) {
    d.total_events = *c.total_events;
  } else if (c.hazard_ratio) {
    d.total_events = schoenfeld_events(*c.hazard_ratio, c.alpha, c.power, q, 1.0 - q);
  }
  d.information_fraction = c.information_fraction;
  if (c.information_fraction) {
    double p = patient_fraction(*c.information_fraction, d.total_events, n);
    if (c.p_decimals) p = round_to_decimals(p, *c.p_decimals);
    require(p > 0.0 && p < 1.0, "rounded patient fraction left (0, 1)");
    d.patient_fraction = p;
  } else {
    d.patient_fraction = *c.p;
  }
  return d;
}

namespace {

using Cell = std::variant<std::monostate, double, long long, std::string, bool>;
using Row = std::vector<std::pair<std::string, Cell>>;

std::string format_number(double x) {
  if (!std::isfinite(x)) return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string csv_cell(const Cell& cell) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) return "";
        else if constexpr (std::is_same_v<T, double>) return format_number(v);
        else if constexpr (std::is_same_v<T, long long>) return std::to_string(v);
        else if constexpr (std::is_same_v<T, bool>) return v ? "true" : "false";
        else {
          if (v.find_first_of(",\"\n") == std::string::npos) return v;
          std::string out = "\"";
          for (char ch : v) out += ch == '"' ? std::string("\"\"") : std::string(1, ch);
          return out + "\"";
        }
      },
      cell);
}

ordered json_cell(const Cell& cell) {
  return std::visit(
      [](const auto& v) -> ordered {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) return nullptr;
        else if constexpr (std::is_same_v<T, double>) {
          if (!std::isfinite(v)) return nullptr;
          return v;
        } else return v;
      },
      cell);
}

std::string to_csv(const std::vector<Row>& rows) {
  if (rows.empty()) return "";
  std::string out;
  for (std::size_t i = 0; i < rows[0].size(); ++i) out += (i ? "," : "") + rows[0][i].first;
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + csv_cell(row[i].second);
    out += '\n';
  }
  return out;
}

ordered to_json_rows(const std::vector<Row>& rows) {
  ordered list = ordered::array();
  for (const auto& row : rows) {
    ordered obj = ordered::object();
    for (const auto& [key, cell] : row) obj[key] = json_cell(cell);
    list.push_back(std::move(obj));
  }
  return list;
}

Cell optional_cell(const std::optional<double>& x) {
  return x ? Cell{*x} : Cell{};
}

const char* mode_name(DeltaSpec::Mode mode) {
  return mode == DeltaSpec::Mode::relative ? "relative" : "absolute";
}

const char* estimator_name(Estimator e) {
  return e == Estimator::breslow ? "breslow" : "kaplan_meier";
}

std::string arm_label(const TrialDesign& d, std::size_t a) {
  const auto& label = d.arms[a].survival.label();
  if (!label.empty()) return label;
  return a == 0 ? "control" : "experimental";
}

Row plan_row(const ScenarioConfig& c, const TrialDesign& d, double delta_value,
             const InterimPlan& plan, std::size_t a, bool clip) {
  const auto& arm = plan.arms[a];
  const auto& pi = arm.interval;
  return {
      {"scenario", c.id},
      {"delta", delta_value},
      {"delta_mode", std::string(mode_name(c.delta_mode))},
      {"delta_months", plan.delta},
      {"arm", static_cast<long long>(a)},
      {"label", arm_label(d, a)},
      {"n_total", static_cast<long long>(d.n_total())},
      {"n_arm", static_cast<long long>(d.arm_sizes[a])},
      {"accrual_months", d.accrual.duration()},
      {"fu_after_last", optional_cell(d.fu_after_last)},
      {"total_events", d.total_events > 0 ? Cell{static_cast<long long>(d.total_events)} : Cell{}},
      {"information_fraction", optional_cell(d.information_fraction)},
      {"p", plan.p},
      {"t_p", plan.t_p},
      {"center", arm.center},
      {"sigma", pi.sigma},
      {"var_estimation", arm.variance.term_estimation},
      {"var_timing", arm.variance.term_timing},
      {"var_cross", arm.variance.term_cross},
      {"lower", clip ? pi.clipped_lower : pi.lower},
      {"upper", clip ? pi.clipped_upper : pi.upper},
      {"clipped_lower", pi.clipped_lower},
      {"clipped_upper", pi.clipped_upper},
  };
}

std::string dump(const ordered& j) { return j.dump(2) + "\n"; }

}  // namespace

Report design_report(const std::vector<ScenarioConfig>& scenarios) {
  std::vector<Row> rows;
  for (const auto& c : scenarios) {
    const TrialDesign d = build_design(c);
    const double t_p = d.interim_time();
    const double end = d.study_end();
    std::optional<double> exact;
    if (d.hazard_ratio) {
      exact = schoenfeld_events_exact(*d.hazard_ratio, d.alpha, d.power, d.arms[0].weight,
                                      d.arms[1].weight);
    }
    rows.push_back({
        {"scenario", c.id},
        {"n_total", static_cast<long long>(d.n_total())},
        {"n_control", static_cast<long long>(d.arm_sizes[0])},
        {"n_experimental", static_cast<long long>(d.arm_sizes[1])},
        {"accrual_months", d.accrual.duration()},
        {"fu_after_last", optional_cell(d.fu_after_last)},
        {"study_end", std::isfinite(end) ? Cell{end} : Cell{}},
        {"hazard_ratio", optional_cell(d.hazard_ratio)},
        {"total_events", d.total_events > 0 ? Cell{static_cast<long long>(d.total_events)} : Cell{}},
        {"total_events_exact", optional_cell(exact)},
        {"expected_events_at_end", std::isfinite(end) ? Cell{expected_events(d, end)} : Cell{}},
        {"information_fraction", optional_cell(d.information_fraction)},
        {"p", d.patient_fraction},
        {"t_p", t_p},
    });
  }
  ordered j = ordered::object();
  j["kind"] = "design";
  j["rows"] = to_json_rows(rows);
  return {dump(j), to_csv(rows), "", true};
}

Report plan_report(const std::vector<ScenarioConfig>& scenarios, const RunOptions& options) {
  std::vector<Row> rows;
  for (const auto& c : scenarios) {
    const TrialDesign d = build_design(c);
    const double t_p = d.interim_time();
    for (double delta : c.deltas) {
      const InterimPlan plan =
          expected_km_at_time(d, t_p, DeltaSpec{c.delta_mode, delta}, c.interval_alpha);
      for (std::size_t a = 0; a < plan.arms.size(); ++a) {
        rows.push_back(plan_row(c, d, delta, plan, a, options.clip_bounds));
      }
    }
  }
  ordered j = ordered::object();
  j["kind"] = "plan";
  j["clip_bounds"] = options.clip_bounds;
  j["rows"] = to_json_rows(rows);
  return {dump(j), to_csv(rows), "", true};
}

long long requested_replicates(const std::vector<ScenarioConfig>& scenarios,
                               const RunOptions& options) {
  long long total = 0;
  for (const auto& c : scenarios) {
    total += static_cast<long long>(options.replicates.value_or(c.replicates)) *
             static_cast<long long>(c.deltas.size());
  }
  return total;
}

Report simulate_report(const std::vector<ScenarioConfig>& scenarios, const RunOptions& options) {
  require(!options.replicates || *options.replicates >= 1, "replicates must be positive");
  const long long grand_total = requested_replicates(scenarios, options);
  if (options.max_replicates > 0 && grand_total > options.max_replicates) {
    throw ConfigError({{"/replicates", "request asks for " + std::to_string(grand_total) +
                                           " replicates, above the cap of " +
                                           std::to_string(options.max_replicates)}});
  }
  std::vector<Row> rows;
  std::string dump_csv = "scenario,delta,replicate,t_hat,arm,estimate\n";
  bool all_pass = true;
  long long finished_before = 0;
  for (const auto& c : scenarios) {
    const TrialDesign d = build_design(c);
    const double t_p = d.interim_time();
    for (double delta : c.deltas) {
      SimulationConfig sim;
      sim.design = d;
      sim.replicates = options.replicates.value_or(c.replicates);
      sim.seed = options.seed.value_or(c.seed);
      sim.delta = DeltaSpec{c.delta_mode, delta};
      sim.estimator = c.estimator;
      sim.threads = options.threads;
      ProgressCallback progress;
      if (options.progress) {
        progress = [&, offset = finished_before](int done, int) {
          options.progress(static_cast<int>(offset + done), static_cast<int>(grand_total));
        };
      }
      const SimulationSummary summary = run_simulation(sim, progress);
      finished_before += sim.replicates;
      const InterimPlan plan = expected_km_at_time(d, t_p, sim.delta, c.interval_alpha);
      const AgreementReport agreement = compare_to_asymptotics(summary, plan, options.tolerance);
      const auto cover = coverage(summary, plan);
      all_pass = all_pass && agreement.pass;
      for (std::size_t a = 0; a < plan.arms.size(); ++a) {
        Row row = plan_row(c, d, delta, plan, a, options.clip_bounds);
        const auto& arm = summary.arms[a];
        const auto& cmp = agreement.arms[a];
        const Row extra = {
            {"replicates", static_cast<long long>(summary.replicates)},
            {"failures", static_cast<long long>(summary.failures)},
            {"seed", std::to_string(sim.seed)},
            {"estimator", std::string(estimator_name(c.estimator))},
            {"mc_mean", arm.mean},
            {"mc_lower", arm.lower},
            {"mc_upper", arm.upper},
            {"mc_scaled_variance", arm.scaled_variance},
            {"coverage", cover[a]},
            {"t_hat_mean", summary.t_hat_mean},
            {"t_hat_sd", summary.t_hat_sd},
            {"diff_center", cmp.diff_center},
            {"diff_lower", cmp.diff_lower},
            {"diff_upper", cmp.diff_upper},
            {"boundary", cmp.boundary},
            {"compared", cmp.compared},
            {"pass", cmp.pass},
        };
        row.insert(row.end(), extra.begin(), extra.end());
        rows.push_back(std::move(row));
      }
      if (options.dump) {
        std::size_t k = 0;
        for (std::size_t i = 0; i < summary.t_hat.size(); ++i, ++k) {
          for (std::size_t a = 0; a < summary.arms.size(); ++a) {
            dump_csv += c.id + "," + format_number(delta) + "," + std::to_string(k) + "," +
                        format_number(summary.t_hat[i]) + "," + std::to_string(a) + "," +
                        format_number(summary.arms[a].values[i]) + "\n";
          }
        }
      }
    }
  }
  ordered j = ordered::object();
  j["kind"] = "simulate";
  j["clip_bounds"] = options.clip_bounds;
  j["tolerance"] = options.tolerance;
  j["pass"] = all_pass;
  j["rows"] = to_json_rows(rows);
  return {dump(j), to_csv(rows), options.dump ? dump_csv : "", all_pass};
}

}  // namespace interimkm
