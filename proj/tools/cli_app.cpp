#include "cli_app.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "persist/errors.hpp"
#include "persist/persistence.hpp"
#include "persist/rational_parse.hpp"
#include "persist/simulator.hpp"
#include "persist/solvers.hpp"

namespace persist::cli {

namespace {

using Record = nlohmann::ordered_json;

constexpr const char* kUnitsNote =
    "Units: --C, --p and --epsilon take a fraction (0.3) or a percentage (30%), read as exact\n"
    "decimals. --c is the fraction of nodes replaced per time unit; --delta counts whole units.\n"
    "alpha = ceil(C*n): exact when C comes from --C, after one double rounding of C*n when C\n"
    "is derived from --c/--delta. --C static means alpha = 0.";

constexpr std::size_t kMaxInlineRational = 80;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Format { text, json, csv };

std::string fmt_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return fmt::format("{:.17g}", x);
}

std::string scalar_text(const Record& v) {
  if (v.is_null()) return "na";
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  if (v.is_number_float()) return fmt_double(v.get<double>());
  return v.dump();
}

// JSON has no infinities; a zero probability has no finite logarithm.
Record json_log(LogReal x) {
  if (x.is_zero()) return nullptr;
  return x.log();
}

void render_csv_rows(const std::vector<Record>& rows, std::ostream& out) {
  if (rows.empty()) return;
  std::string header;
  for (const auto& [key, value] : rows.front().items()) header += (header.empty() ? "" : ",") + key;
  out << header << '\n';
  for (const Record& row : rows) {
    bool first = true;
    for (const auto& [key, value] : row.items()) {
      out << (first ? "" : ",") << scalar_text(value);
      first = false;
    }
    out << '\n';
  }
}

void render_record(const Record& rec, Format format, std::ostream& out) {
  switch (format) {
    case Format::json:
      out << rec.dump(2) << '\n';
      return;
    case Format::csv: {
      render_csv_rows({rec}, out);
      return;
    }
    case Format::text: {
      std::size_t width = 0;
      for (const auto& [key, value] : rec.items()) width = std::max(width, key.size());
      for (const auto& [key, value] : rec.items()) {
        std::string text = scalar_text(value);
        if (text.size() > kMaxInlineRational && value.is_string()) {
          text = fmt::format("<{}-character rational, use --json>", text.size());
        }
        out << fmt::format("{:<{}}  {}\n", key, width, text);
      }
      return;
    }
  }
}

void render_rows(const std::string& command, const std::vector<Record>& rows, Format format, std::ostream& out) {
  if (format == Format::json) {
    Record doc;
    doc["command"] = command;
    doc["rows"] = rows;
    out << doc.dump(2) << '\n';
    return;
  }
  render_csv_rows(rows, out);
}

std::string fraction_label(const ExactRational& x) { return x.str(); }

double to_double(const ExactRational& x) { return x.convert_to<double>(); }

ExactRational parse_probability(const std::string& text, const char* flag) {
  const ExactRational value = parse_exact(text);
  if (value < 0 || value > 1) throw DomainError(fmt::format("{} must lie in [0, 1] (got {})", flag, text));
  return value;
}

// ---------------------------------------------------------------- options

struct FormatOptions {
  bool json = false;
  bool csv = false;

  void add(CLI::App* app) {
    app->add_flag("--json", json, "Emit a JSON record");
    app->add_flag("--csv", csv, "Emit CSV (header row, LF line endings)");
  }
  Format resolve(Format fallback = Format::text) const {
    if (json && csv) throw UsageError("--json and --csv are mutually exclusive");
    if (json) return Format::json;
    if (csv) return Format::csv;
    return fallback;
  }
};

struct ModeOption {
  std::string mode = "auto";

  void add(CLI::App* app) {
    app->add_option("--mode", mode, "Arithmetic: auto (exact for n <= 2000), exact, logspace")
        ->check(CLI::IsMember({"auto", "exact", "logspace"}));
  }
  std::optional<NumericMode> resolve() const {
    if (mode == "exact") return NumericMode::exact;
    if (mode == "logspace") return NumericMode::logspace;
    return std::nullopt;
  }
};

struct ChurnOptions {
  std::optional<std::int64_t> alpha;
  std::optional<std::string> ratio;
  std::optional<std::string> rate;
  std::optional<std::int64_t> delta;

  void add(CLI::App* app, bool with_rate = true) {
    app->add_option("--alpha", alpha, "Number of initial nodes replaced");
    app->add_option("--C", ratio, "Replaced share of the initial nodes (0.3, 30% or 'static')");
    if (with_rate) {
      app->add_option("--c", rate, "Share of nodes replaced per time unit");
      app->add_option("--delta", delta, "Elapsed whole time units");
    }
  }
  bool given() const { return alpha || ratio || rate || delta; }
};

struct ResolvedChurn {
  std::int64_t alpha = 0;
  double ratio_C = 0.0;
  std::optional<double> rate;
  std::optional<std::int64_t> delta;
};

ResolvedChurn resolve_churn(std::int64_t n, const ChurnOptions& opts) {
  const int forms = int{opts.alpha.has_value()} + int{opts.ratio.has_value()} +
                    int{opts.rate.has_value() || opts.delta.has_value()};
  if (forms != 1) throw UsageError("give exactly one churn form: --alpha, --C, or --c with --delta");
  if (n < 1) throw DomainError(fmt::format("--n must be >= 1 (got {})", n));

  ResolvedChurn out;
  if (opts.alpha) {
    if (*opts.alpha < 0 || *opts.alpha > n) {
      throw DomainError(fmt::format("--alpha must lie in [0, n={}] (got {})", n, *opts.alpha));
    }
    out.alpha = *opts.alpha;
    out.ratio_C = static_cast<double>(out.alpha) / static_cast<double>(n);
  } else if (opts.ratio) {
    if (*opts.ratio == "static") return out;
    const ExactRational ratio = parse_probability(*opts.ratio, "--C");
    out.alpha = replaced_count(n, ratio);
    out.ratio_C = to_double(ratio);
  } else {
    if (!opts.rate || !opts.delta) throw UsageError("--c and --delta must be given together");
    out.rate = to_double(parse_exact(*opts.rate));
    out.delta = *opts.delta;
    out.ratio_C = churn_ratio(*out.rate, *out.delta);
    out.alpha = replaced_count(n, out.ratio_C);
  }
  return out;
}

void put_churn(Record& rec, const ResolvedChurn& churn) {
  if (churn.rate) rec["c"] = *churn.rate;
  if (churn.delta) rec["delta"] = *churn.delta;
  rec["C"] = churn.ratio_C;
  rec["alpha"] = churn.alpha;
}

struct TargetOptions {
  std::optional<std::string> epsilon;
  std::optional<std::string> p;

  void add(CLI::App* app) {
    app->add_option("--epsilon", epsilon, "Largest acceptable miss probability (0.001 or 0.1%)");
    app->add_option("--p", p, "Smallest acceptable hit probability (0.999 or 99.9%)");
  }
  bool given() const { return epsilon || p; }
  TuningTarget resolve() const {
    if (epsilon.has_value() == p.has_value()) throw UsageError("give exactly one of --epsilon or --p");
    if (epsilon) return TuningTarget::from_epsilon(parse_exact(*epsilon));
    return TuningTarget::from_p(parse_exact(*p));
  }
};

void put_probability(Record& rec, const std::string& prefix, const MissProbability& mp) {
  rec[prefix] = mp.epsilon();
  if (mp.exact) rec[prefix + "_exact"] = fraction_label(*mp.exact);
}

// ---------------------------------------------------------------- commands

struct ProbCommand {
  std::int64_t n = 0;
  std::int64_t q = 0;
  ChurnOptions churn;
  ModeOption mode;
  FormatOptions format;

  void add(CLI::App& app) {
    CLI::App* cmd = app.add_subcommand("prob", "Miss probability of a q-node core probed with q nodes");
    cmd->add_option("--n", n, "Number of nodes")->required();
    cmd->add_option("--q", q, "Core size, equal to the number of probes")->required();
    churn.add(cmd);
    mode.add(cmd);
    format.add(cmd);
    cmd->footer(kUnitsNote);
  }

  int run(std::ostream& out) const {
    const ResolvedChurn resolved = resolve_churn(n, churn);
    const MissProbability mp = miss_probability(n, resolved.alpha, {q, mode.resolve()});
    Record rec;
    rec["command"] = "prob";
    rec["n"] = n;
    rec["q"] = q;
    put_churn(rec, resolved);
    rec["mode"] = to_string(mp.mode);
    rec["epsilon"] = mp.epsilon();
    rec["p"] = mp.p_hit();
    rec["log_epsilon"] = json_log(mp.log_epsilon);
    if (mp.exact) {
      rec["epsilon_exact"] = fraction_label(*mp.exact);
      rec["p_exact"] = fraction_label(*mp.exact_p_hit());
    }
    render_record(rec, format.resolve(), out);
    return kExitOk;
  }
};

Record size_record(std::int64_t n, const ResolvedChurn& churn, const TuningTarget& target,
                   const CoreSizeResult& result) {
  Record rec;
  rec["command"] = "size";
  rec["n"] = n;
  put_churn(rec, churn);
  rec["epsilon_max"] = target.epsilon_max_double();
  rec["mode"] = to_string(result.at_q.mode);
  rec["q"] = result.q;
  put_probability(rec, "epsilon_at_q", result.at_q);
  if (result.at_predecessor) {
    put_probability(rec, "epsilon_at_q_minus_1", *result.at_predecessor);
  } else {
    rec["epsilon_at_q_minus_1"] = nullptr;
  }
  return rec;
}

struct SizeCommand {
  std::int64_t n = 0;
  ChurnOptions churn;
  TargetOptions target;
  ModeOption mode;
  FormatOptions format;

  void add(CLI::App& app) {
    CLI::App* cmd = app.add_subcommand("size", "Smallest core size meeting a miss-probability target");
    cmd->add_option("--n", n, "Number of nodes")->required();
    target.add(cmd);
    churn.add(cmd);
    mode.add(cmd);
    format.add(cmd);
    cmd->footer(std::string(kUnitsNote) +
                "\nPrints q with eps(q) <= target and the rejected eps(q-1) as a witness.");
  }

  int run(std::ostream& out) const {
    const ResolvedChurn resolved = resolve_churn(n, churn);
    const TuningTarget tuning = target.resolve();
    const CoreSizeResult result = min_core_size(n, resolved.alpha, tuning, mode.resolve());
    render_record(size_record(n, resolved, tuning, result), format.resolve(), out);
    return kExitOk;
  }
};

struct LifetimeCommand {
  std::string rate;
  std::optional<std::string> ratio;
  std::optional<std::int64_t> n;
  std::optional<std::int64_t> q;
  std::int64_t horizon = kDefaultSpanHorizon;
  TargetOptions target;
  ModeOption mode;
  FormatOptions format;

  void add(CLI::App& app) {
    CLI::App* cmd = app.add_subcommand("lifetime", "Longest span (in time units) before a budget is exceeded");
    cmd->add_option("--c", rate, "Share of nodes replaced per time unit")->required();
    cmd->add_option("--C", ratio, "Churn budget: largest tolerated replaced share");
    cmd->add_option("--n", n, "Number of nodes (core-lifetime form)");
    cmd->add_option("--q", q, "Core size (core-lifetime form)");
    cmd->add_option("--horizon", horizon, "Search cap for the core-lifetime form");
    target.add(cmd);
    mode.add(cmd);
    format.add(cmd);
    cmd->footer(std::string(kUnitsNote) +
                "\nForms: --c --C gives the largest delta with 1-(1-c)^delta <= C;\n"
                "--c --n --q with --epsilon|--p gives the largest delta whose alpha still meets the target.");
  }

  int run(std::ostream& out) const {
    const double c = to_double(parse_exact(rate));
    Record rec;
    rec["command"] = "lifetime";
    rec["c"] = c;
    if (ratio) {
      if (n || q || target.given()) throw UsageError("--C cannot be combined with --n, --q or a target");
      const double budget = to_double(parse_probability(*ratio, "--C"));
      const SpanResult span = delta_for_churn(c, budget);
      rec["C_max"] = budget;
      rec["delta"] = span.delta;
      rec["C_at_delta"] = span.ratio_at_delta;
      rec["C_at_delta_plus_1"] = span.ratio_at_next;
    } else {
      if (!n || !q) throw UsageError("give --C, or --n and --q with --epsilon|--p");
      const TuningTarget tuning = target.resolve();
      const MaxSpanResult span = max_delta(*n, *q, c, tuning, horizon, mode.resolve());
      rec["n"] = *n;
      rec["q"] = *q;
      rec["epsilon_max"] = tuning.epsilon_max_double();
      rec["mode"] = to_string(span.at_delta.mode);
      rec["delta"] = span.delta;
      rec["unbounded"] = span.unbounded;
      rec["horizon"] = horizon;
      rec["alpha_at_delta"] = span.alpha_at_delta;
      rec["epsilon_at_delta"] = span.at_delta.epsilon();
      rec["alpha_at_delta_plus_1"] = span.alpha_at_next ? Record(*span.alpha_at_next) : Record(nullptr);
      rec["epsilon_at_delta_plus_1"] = span.at_next ? Record(span.at_next->epsilon()) : Record(nullptr);
    }
    render_record(rec, format.resolve(), out);
    return kExitOk;
  }
};

struct ChurnCommand {
  std::string ratio;
  std::int64_t delta = 1;
  FormatOptions format;

  void add(CLI::App& app) {
    CLI::App* cmd = app.add_subcommand("churn", "Per-unit churn rate that replaces a share C within delta units");
    cmd->add_option("--C", ratio, "Replaced share of the initial nodes")->required();
    cmd->add_option("--delta", delta, "Elapsed whole time units")->required();
    format.add(cmd);
    cmd->footer("c = 1 - (1-C)^(1/delta). " + std::string(kUnitsNote));
  }

  int run(std::ostream& out) const {
    const double budget = to_double(parse_probability(ratio, "--C"));
    const double c = churn_rate_for(budget, delta);
    Record rec;
    rec["command"] = "churn";
    rec["C"] = budget;
    rec["delta"] = delta;
    rec["c"] = c;
    rec["C_roundtrip"] = churn_ratio(c, delta);
    render_record(rec, format.resolve(), out);
    return kExitOk;
  }
};

struct TableCommand {
  std::vector<std::int64_t> sizes{1000, 10000, 100000};
  std::vector<std::string> hit_levels{"99%", "99.9%"};
  std::vector<std::string> ratios{"static", "10%", "30%", "60%", "80%"};
  ModeOption mode;
  FormatOptions format;

  void add(CLI::App& app) {
    CLI::App* cmd = app.add_subcommand("table", "Grid of minimal core sizes over n, p and C");
    cmd->add_option("--n", sizes, "Node counts")->delimiter(',');
    cmd->add_option("--p", hit_levels, "Hit probabilities")->delimiter(',');
    cmd->add_option("--C", ratios, "Churn ratios ('static' for none)")->delimiter(',');
    mode.add(cmd);
    format.add(cmd);
    cmd->footer(std::string(kUnitsNote) + "\nText output is a markdown grid; --csv and --json give one row per cell.");
  }

  int run(std::ostream& out) const {
    if (sizes.empty() || hit_levels.empty() || ratios.empty()) throw UsageError("table axes must be nonempty");
    std::vector<Record> rows;
    for (const std::string& level : hit_levels) {
      const TuningTarget tuning = TuningTarget::from_p(parse_probability(level, "--p"));
      for (const std::string& ratio : ratios) {
        for (const std::int64_t n : sizes) {
          ChurnOptions churn;
          churn.ratio = ratio;
          const ResolvedChurn resolved = resolve_churn(n, churn);
          Record row;
          row["p"] = level;
          row["C"] = ratio;
          row["n"] = n;
          row["alpha"] = resolved.alpha;
          try {
            const CoreSizeResult result = min_core_size(n, resolved.alpha, tuning, mode.resolve());
            row["q"] = result.q;
            row["epsilon_at_q"] = result.at_q.epsilon();
            row["epsilon_at_q_minus_1"] =
                result.at_predecessor ? Record(result.at_predecessor->epsilon()) : Record(nullptr);
          } catch (const InfeasibleError&) {
            row["q"] = nullptr;
            row["epsilon_at_q"] = nullptr;
            row["epsilon_at_q_minus_1"] = nullptr;
          }
          rows.push_back(std::move(row));
        }
      }
    }

    const Format f = format.resolve();
    if (f != Format::text) {
      render_rows("table", rows, f, out);
      return kExitOk;
    }
    out << "| p | C |";
    for (const std::int64_t n : sizes) out << " n=" << n << " |";
    out << "\n|---|---|";
    for (std::size_t i = 0; i < sizes.size(); ++i) out << "---|";
    out << '\n';
    for (std::size_t r = 0; r < rows.size(); r += sizes.size()) {
      out << "| " << scalar_text(rows[r]["p"]) << " | " << scalar_text(rows[r]["C"]) << " |";
      for (std::size_t i = 0; i < sizes.size(); ++i) out << ' ' << scalar_text(rows[r + i]["q"]) << " |";
      out << '\n';
    }
    return kExitOk;
  }
};

struct SweepCommand {
  std::string variable;
  std::optional<std::string> from;
  std::optional<std::string> to;
  std::optional<std::string> step;
  std::vector<std::string> values;
  std::optional<std::int64_t> n;
  std::optional<std::int64_t> q;
  ChurnOptions churn;
  TargetOptions target;
  ModeOption mode;
  FormatOptions format;

  void add(CLI::App& app) {
    CLI::App* cmd = app.add_subcommand("sweep", "Tabulate derived quantities over a range of one variable");
    cmd->add_option("--var", variable, "Swept variable")
        ->required()
        ->check(CLI::IsMember({"q", "delta", "c", "C", "epsilon"}));
    cmd->add_option("--from", from, "First value");
    cmd->add_option("--to", to, "Last value (inclusive)");
    cmd->add_option("--step", step, "Increment");
    cmd->add_option("--values", values, "Explicit values instead of a range")->delimiter(',');
    cmd->add_option("--n", n, "Number of nodes")->required();
    cmd->add_option("--q", q, "Core size (omit to leave epsilon as na)");
    churn.add(cmd);
    target.add(cmd);
    mode.add(cmd);
    format.add(cmd);
    cmd->footer(std::string(kUnitsNote) +
                "\nColumns: variable,C,alpha,q,epsilon,p where 'variable' holds the swept value.\n"
                "Fixed parameters: q needs a churn form; delta needs --c; c needs --delta;\n"
                "epsilon needs a churn form and reports the minimal q for each target.");
  }

  std::vector<ExactRational> points() const {
    std::vector<ExactRational> out;
    if (!values.empty()) {
      if (from || to || step) throw UsageError("--values cannot be combined with --from/--to/--step");
      for (const std::string& v : values) out.push_back(parse_exact(v));
    } else {
      if (!from || !to) throw UsageError("give --from and --to, or --values");
      const ExactRational first = parse_exact(*from);
      const ExactRational last = parse_exact(*to);
      const ExactRational increment = step ? parse_exact(*step) : ExactRational(1);
      if (increment <= 0) throw UsageError("--step must be positive");
      for (ExactRational x = first; x <= last; x += increment) out.push_back(x);
    }
    if (out.empty()) throw UsageError("sweep range is empty");
    return out;
  }

  static std::int64_t as_integer(const ExactRational& x, const char* name) {
    if (boost::multiprecision::denominator(x) != 1) {
      throw DomainError(fmt::format("{} must be an integer (got {})", name, x.str()));
    }
    return boost::multiprecision::numerator(x).convert_to<std::int64_t>();
  }

  void put_miss(Record& row, std::int64_t alpha) const {
    if (!q) {
      row["q"] = nullptr;
      row["epsilon"] = nullptr;
      row["p"] = nullptr;
      return;
    }
    const MissProbability mp = miss_probability(*n, alpha, {*q, mode.resolve()});
    row["q"] = *q;
    row["epsilon"] = mp.epsilon();
    row["p"] = mp.p_hit();
  }

  Record row_for(const ExactRational& x) const {
    Record row;
    if (variable == "q") {
      if (q) throw UsageError("--q is the swept variable");
      const std::int64_t probe = as_integer(x, "q");
      const ResolvedChurn resolved = resolve_churn(*n, churn);
      const MissProbability mp = miss_probability(*n, resolved.alpha, {probe, mode.resolve()});
      row["variable"] = probe;
      row["C"] = resolved.ratio_C;
      row["alpha"] = resolved.alpha;
      row["q"] = probe;
      row["epsilon"] = mp.epsilon();
      row["p"] = mp.p_hit();
    } else if (variable == "delta" || variable == "c") {
      if (churn.alpha || churn.ratio) throw UsageError("--alpha/--C conflict with a " + variable + " sweep");
      ChurnOptions fixed = churn;
      if (variable == "delta") {
        if (!churn.rate) throw UsageError("a delta sweep needs --c");
        fixed.delta = as_integer(x, "delta");
        row["variable"] = *fixed.delta;
      } else {
        if (!churn.delta) throw UsageError("a c sweep needs --delta");
        fixed.rate = x.str();
        row["variable"] = to_double(x);
      }
      const ResolvedChurn resolved = resolve_churn(*n, fixed);
      row["C"] = resolved.ratio_C;
      row["alpha"] = resolved.alpha;
      put_miss(row, resolved.alpha);
    } else if (variable == "C") {
      if (churn.given()) throw UsageError("churn options conflict with a C sweep");
      ChurnOptions fixed;
      fixed.ratio = x.str();
      const ResolvedChurn resolved = resolve_churn(*n, fixed);
      row["variable"] = to_double(x);
      row["C"] = resolved.ratio_C;
      row["alpha"] = resolved.alpha;
      put_miss(row, resolved.alpha);
    } else {
      if (q || target.given()) throw UsageError("an epsilon sweep solves for q; drop --q/--epsilon/--p");
      const ResolvedChurn resolved = resolve_churn(*n, churn);
      row["variable"] = to_double(x);
      row["C"] = resolved.ratio_C;
      row["alpha"] = resolved.alpha;
      try {
        const CoreSizeResult result = min_core_size(*n, resolved.alpha, TuningTarget::from_epsilon(x), mode.resolve());
        row["q"] = result.q;
        row["epsilon"] = result.at_q.epsilon();
        row["p"] = result.at_q.p_hit();
      } catch (const InfeasibleError&) {
        row["q"] = nullptr;
        row["epsilon"] = nullptr;
        row["p"] = nullptr;
      }
    }
    return row;
  }

  int run(std::ostream& out) const {
    if (variable != "epsilon" && target.given()) throw UsageError("--epsilon/--p only apply to an epsilon sweep");
    std::vector<Record> rows;
    for (const ExactRational& x : points()) rows.push_back(row_for(x));
    render_rows("sweep", rows, format.resolve(Format::csv), out);
    return kExitOk;
  }
};

struct SimulateCommand {
  std::string model = "urn";
  std::int64_t n = 0;
  std::int64_t q = 0;
  std::int64_t trials = 100000;
  ChurnOptions churn;
  bool fractional = false;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  bool check = false;
  FormatOptions format;

  void add(CLI::App& app) {
    CLI::App* cmd = app.add_subcommand("simulate", "Monte Carlo estimate of the miss probability");
    cmd->add_option("--model", model, "urn (alpha fixed) or churn (per-unit replacement process)")
        ->check(CLI::IsMember({"urn", "churn"}));
    cmd->add_option("--n", n, "Number of nodes")->required();
    cmd->add_option("--q", q, "Core size, equal to the number of probes")->required();
    cmd->add_option("--trials", trials, "Number of independent trials");
    churn.add(cmd);
    cmd->add_flag("--fractional", fractional, "Churn model: replace c*n per unit on average instead of ceil(c*n)");
    cmd->add_option("--seed", seed, "Base seed; trial i uses a stream derived from (seed, i)");
    cmd->add_option("--threads", threads,
                    fmt::format("Worker threads (0: ${} or hardware concurrency)", kThreadsEnvVar));
    cmd->add_flag("--check", check, "Exit 4 when |z| against the closed form exceeds 3");
    format.add(cmd);
    cmd->footer(std::string(kUnitsNote) +
                "\nurn model: --alpha or --C. churn model: --c and --delta, replacing ceil(c*n) nodes per unit.\n"
                "The 99% interval is the Wilson score interval; z uses the analytic standard error.");
  }

  int run(std::ostream& out) const {
    TrialConfig config;
    config.n = n;
    config.q = q;
    config.trials = trials;
    config.seed = seed;
    config.threads = threads;
    config.fractional_churn = fractional;
    if (model == "urn") {
      if (churn.rate || churn.delta) throw UsageError("the urn model takes --alpha or --C");
      config.model = TrialModel::urn;
      config.alpha = resolve_churn(n, churn).alpha;
    } else {
      if (churn.alpha || churn.ratio) throw UsageError("the churn model takes --c and --delta");
      if (!churn.rate || !churn.delta) throw UsageError("the churn model needs --c and --delta");
      config.model = TrialModel::churn_process;
      config.c = to_double(parse_exact(*churn.rate));
      config.delta = *churn.delta;
    }
    const AnalyticComparison cmp = compare_with_analytic(config);

    Record rec;
    rec["command"] = "simulate";
    rec["model"] = to_string(config.model);
    rec["n"] = n;
    rec["q"] = q;
    if (config.model == TrialModel::churn_process) {
      rec["c"] = config.c;
      rec["delta"] = config.delta;
    }
    rec["C"] = cmp.ratio_C;
    rec["alpha"] = cmp.alpha;
    rec["trials"] = cmp.report.trials;
    rec["seed"] = seed;
    rec["misses"] = cmp.report.misses;
    rec["epsilon_hat"] = cmp.report.epsilon_hat;
    rec["ci99_low"] = cmp.report.ci_low;
    rec["ci99_high"] = cmp.report.ci_high;
    rec["epsilon_analytic"] = cmp.analytic.epsilon();
    rec["z_score"] = std::isfinite(cmp.z_score) ? Record(cmp.z_score) : Record(nullptr);
    rec["flagged"] = cmp.flagged;
    if (cmp.report.survivors) {
      const SurvivorStats& s = *cmp.report.survivors;
      rec["replaced_per_unit"] = s.replaced_per_unit;
      rec["core_survivors_mean"] = s.core_mean;
      rec["core_survivors_stddev"] = s.core_stddev;
      rec["initial_survivor_fraction_mean"] = s.initial_fraction_mean;
      rec["initial_survivor_fraction_stddev"] = s.initial_fraction_stddev;
    }
    render_record(rec, format.resolve(), out);
    return check && cmp.flagged ? kExitCheckFailed : kExitOk;
  }
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Core sizing and persistence probabilities for churning peer-to-peer systems", "persist"};
  app.require_subcommand(1);
  ProbCommand prob;
  SizeCommand size;
  LifetimeCommand lifetime;
  ChurnCommand churn;
  TableCommand table;
  SweepCommand sweep;
  SimulateCommand simulate;
  prob.add(app);
  size.add(app);
  lifetime.add(app);
  churn.add(app);
  table.add(app);
  sweep.add(app);
  simulate.add(app);

  std::vector<const char*> argv{"persist"};
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    const CLI::App* chosen = app.get_subcommands().front();
    const std::string name = chosen->get_name();
    if (name == "prob") return prob.run(out);
    if (name == "size") return size.run(out);
    if (name == "lifetime") return lifetime.run(out);
    if (name == "churn") return churn.run(out);
    if (name == "table") return table.run(out);
    if (name == "sweep") return sweep.run(out);
    return simulate.run(out);
  } catch (const InfeasibleError& e) {
    err << "infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

}  // namespace persist::cli
