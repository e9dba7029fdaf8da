#include "mrules/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <future>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "mrules/analysis.hpp"
#include "mrules/certificate.hpp"

namespace mrules::cli {

std::uint64_t seed_from_environment() {
  const char* raw = std::getenv("MRULES_SEED");
  if (raw == nullptr || *raw == '\0') return kDefaultSeed;
  const std::string_view s(raw);
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw InputError("MRULES_SEED must be an unsigned integer");
  return v;
}

namespace {

struct RunConfig {
  EngineConfig engine;
  std::optional<double> act_tol;
  std::string out_path;
  bool fj_only = false;
  bool quiet_near_active = false;
};

void add_tuning(CLI::App* app, RunConfig& rc) {
  app->add_option("--act-tol", rc.act_tol, "activity tolerance")
      ->check(CLI::PositiveNumber);
  app->add_option("--stat-tol", rc.engine.stationarity_tolerance,
                  "stationarity tolerance")
      ->check(CLI::PositiveNumber);
  app->add_option("--restore-tol", rc.engine.ascent.restore_tolerance,
                  "equality restoration tolerance")
      ->check(CLI::PositiveNumber);
  app->add_option("--fp-tol", rc.engine.ascent.fixed_point.tolerance,
                  "fixed-point tolerance")
      ->check(CLI::PositiveNumber);
  app->add_option("--diff-t0", rc.engine.diff.base_step,
                  "initial difference step")
      ->check(CLI::PositiveNumber);
  app->add_option("--diff-depth", rc.engine.diff.richardson_depth,
                  "Richardson extrapolation depth")
      ->check(CLI::Range(2, 12));
  app->add_option("--diff-tol", rc.engine.diff.tolerance,
                  "differentiability tolerance")
      ->check(CLI::PositiveNumber);
  app->add_flag("--no-near-active-warning", rc.quiet_near_active,
                "suppress the near-active warning band");
}

EngineConfig finalize(RunConfig& rc) {
  EngineConfig cfg = rc.engine;
  cfg.activity_tolerance = rc.act_tol;
  cfg.warn_near_active = !rc.quiet_near_active;
  cfg.diff.seed = seed_from_environment();
  cfg.diff.validate();
  return cfg;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot write '" + path + "'");
  f << text;
  if (!f) throw InputError("cannot write '" + path + "'");
}

int cmd_check(const std::string& file, RunConfig& rc, std::ostream& out) {
  const EngineConfig cfg = finalize(rc);
  const LoadedProblem lp = load_problem(file);
  AnalysisOptions opts;
  opts.fritz_john_only = rc.fj_only;
  const Analysis a = analyze(lp.problem, lp.candidate, cfg, opts);
  const std::string doc =
      render(certificate_document(lp.problem, lp.candidate, a));
  out << doc;
  if (!rc.out_path.empty()) write_file(rc.out_path, doc);
  return exit_code(a.verdict);
}

int cmd_ascend(const std::string& file, RunConfig& rc, std::ostream& out) {
  const EngineConfig cfg = finalize(rc);
  const LoadedProblem lp = load_problem(file);
  const Analysis a = analyze(lp.problem, lp.candidate, cfg);
  if (a.verdict != Verdict::kNotOptimal) {
    out << "candidate is FJ-stationary\n";
    return 0;
  }
  const std::string doc =
      render(certificate_document(lp.problem, lp.candidate, a));
  out << doc;
  if (!rc.out_path.empty()) write_file(rc.out_path, doc);
  return exit_code(a.verdict);
}

struct NamedField {
  std::string name;
  const ScalarField* field;
};

int cmd_diffcheck(const std::string& file, const std::string& selector,
                  RunConfig& rc, std::ostream& out) {
  const EngineConfig cfg = finalize(rc);
  const LoadedProblem lp = load_problem(file);
  const ProblemView pv = view(lp.problem);
  validate(pv, lp.candidate);

  // 0 is the objective, then the inequalities, then the equalities.
  std::vector<NamedField> fields{{"objective", &pv.objective}};
  for (std::size_t i = 0; i < pv.inequalities.size(); ++i)
    fields.push_back({"g" + std::to_string(i + 1), &pv.inequalities[i]});
  for (std::size_t j = 0; j < pv.equalities.size(); ++j)
    fields.push_back({"h" + std::to_string(j + 1), &pv.equalities[j]});

  std::vector<std::size_t> chosen;
  if (selector.empty() || selector == "all") {
    for (std::size_t i = 0; i < fields.size(); ++i) chosen.push_back(i);
  } else {
    std::size_t idx = 0;
    auto [ptr, ec] = std::from_chars(selector.data(),
                                     selector.data() + selector.size(), idx);
    if (ec == std::errc() && ptr == selector.data() + selector.size()) {
      if (idx >= fields.size())
        throw InputError("function index " + selector + " is out of range");
      chosen.push_back(idx);
    } else {
      for (std::size_t i = 0; i < fields.size(); ++i)
        if (fields[i].name == selector || fields[i].field->source() == selector)
          chosen.push_back(i);
      if (chosen.empty())
        throw InputError("no function named '" + selector + "'");
      chosen.resize(1);
    }
  }

  Json doc;
  doc["format"] = "mrules-diffcheck/1";
  doc["problem_hash"] = hash_string(problem_hash(lp.problem, lp.candidate));
  doc["point"] = lp.candidate.point;
  Json list = Json::array();
  for (std::size_t i : chosen) {
    Json entry;
    entry["index"] = i;
    entry["name"] = fields[i].name;
    entry["source"] = fields[i].field->source();
    const DiffVerdict v =
        classify(*fields[i].field, lp.candidate.point, cfg.diff, &pv.domain);
    const Json fields_json = to_json(v);
    for (const auto& [k, val] : fields_json.items()) entry[k] = val;
    list.push_back(std::move(entry));
  }
  doc["functions"] = std::move(list);
  const std::string text = render(doc);
  out << text;
  if (!rc.out_path.empty()) write_file(rc.out_path, text);
  return 0;
}

std::string read_text(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw InputError("cannot read '" + p.string() + "'");
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

double compare(const Vector& want, const Vector& got, std::string& detail,
               const char* label) {
  if (want.size() != got.size()) {
    detail = std::string(label) + " length " + std::to_string(got.size()) +
             ", expected " + std::to_string(want.size());
    return std::numeric_limits<double>::infinity();
  }
  double e = 0.0;
  for (std::size_t i = 0; i < want.size(); ++i)
    e = std::max(e, std::abs(want[i] - got[i]));
  return e;
}

CorpusEntry run_one(const std::filesystem::path& problem_path,
                    const EngineConfig& cfg) {
  CorpusEntry e;
  e.name = problem_path.stem().string();
  const auto start = std::chrono::steady_clock::now();
  std::optional<Expectation> want;
  try {
    auto sidecar = problem_path;
    sidecar.replace_extension(".expected");
    want = parse_expectation(read_text(sidecar));
    e.expected = want->verdict;
  } catch (const Error& ex) {
    e.expected = "?";
    e.actual = "?";
    e.detail = std::string("sidecar: ") + ex.what();
    return e;
  }

  std::optional<Analysis> a;
  try {
    const LoadedProblem lp = load_problem(problem_path);
    a = analyze(lp.problem, lp.candidate, cfg);
    e.actual = std::string(to_string(a->verdict));
  } catch (const InputError& ex) {
    e.actual = "INPUT_ERROR";
    e.detail = ex.what();
  } catch (const NumericalError& ex) {
    e.actual = "NUMERICAL_ERROR";
    e.detail = ex.what();
  }
  e.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                            start)
                  .count();

  e.pass = e.actual == want->verdict;
  if (e.pass && a && (want->lambda || want->mu)) {
    const MultiplierCertificate* cert =
        a->kkt ? &*a->kkt : (a->fritz_john ? &*a->fritz_john : nullptr);
    if (cert == nullptr) {
      e.pass = false;
      e.detail = "no multipliers to compare";
    } else {
      if (want->lambda)
        e.max_error = std::max(e.max_error,
                               compare(*want->lambda, cert->lambda, e.detail,
                                       "lambda"));
      if (want->mu)
        e.max_error = std::max(
            e.max_error, compare(*want->mu, cert->mu, e.detail, "mu"));
      if (!(e.max_error <= want->tolerance)) {
        e.pass = false;
        if (e.detail.empty()) e.detail = "multipliers differ";
      }
    }
  } else if (!e.pass && e.detail.empty()) {
    e.detail = "verdict differs";
  }
  return e;
}

}  // namespace

std::vector<CorpusEntry> run_corpus(const std::filesystem::path& dir,
                                    const EngineConfig& cfg) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec))
    throw InputError("'" + dir.string() + "' is not a directory");
  std::vector<std::filesystem::path> files;
  for (const auto& d : std::filesystem::directory_iterator(dir, ec))
    if (d.is_regular_file() && d.path().extension() == ".problem")
      files.push_back(d.path());
  if (ec) throw InputError("cannot list '" + dir.string() + "'");
  if (files.empty())
    throw InputError("no .problem files in '" + dir.string() + "'");
  std::sort(files.begin(), files.end());

  std::vector<std::future<CorpusEntry>> jobs;
  for (const auto& f : files)
    jobs.push_back(std::async(std::launch::async, run_one, f, cfg));
  std::vector<CorpusEntry> out;
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

namespace {

int cmd_corpus(const std::string& dir, RunConfig& rc, std::ostream& out) {
  const EngineConfig cfg = finalize(rc);
  const auto entries = run_corpus(dir, cfg);
  std::size_t width = 7;
  for (const auto& e : entries) width = std::max(width, e.name.size());
  out << std::left << std::setw(static_cast<int>(width) + 2) << "problem"
      << std::setw(17) << "expected" << std::setw(17) << "actual"
      << std::setw(12) << "max_err"
      << "status\n";
  std::size_t failed = 0;
  for (const auto& e : entries) {
    std::ostringstream err;
    err << std::scientific << std::setprecision(2) << e.max_error;
    out << std::left << std::setw(static_cast<int>(width) + 2) << e.name
        << std::setw(17) << e.expected << std::setw(17) << e.actual
        << std::setw(12) << err.str() << (e.pass ? "pass" : "FAIL");
    if (!e.pass) {
      ++failed;
      out << "  " << e.detail;
    }
    out << "\n";
  }
  out << entries.size() - failed << " passed, " << failed << " failed\n";
  return failed == 0 ? 0 : kExitCorpusMismatch;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Fritz John / KKT multiplier checker"};
  app.name("mrules");
  app.require_subcommand(1);

  RunConfig rc;
  std::string file;
  std::string selector;

  auto* check = app.add_subcommand("check", "certify a candidate point");
  check->add_option("file", file, "problem file")->required();
  check->add_option("--out", rc.out_path, "also write the certificate here");
  check->add_flag("--fj-only", rc.fj_only,
                  "report the Fritz John form without KKT normalization");
  add_tuning(check, rc);

  auto* ascend =
      app.add_subcommand("ascend", "build an improving feasible point");
  ascend->add_option("file", file, "problem file")->required();
  ascend->add_option("--out", rc.out_path, "also write the certificate here");
  add_tuning(ascend, rc);

  auto* diff = app.add_subcommand("diffcheck", "classify differentiability");
  diff->add_option("file", file, "problem file")->required();
  diff->add_option("--function", selector,
                   "index (0 = objective), name (g1, h1) or 'all'");
  diff->add_option("--out", rc.out_path, "also write the report here");
  add_tuning(diff, rc);

  auto* corpus = app.add_subcommand("corpus", "run a directory of problems");
  corpus->add_option("dir", file, "directory")->required();
  add_tuning(corpus, rc);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : kExitInputError;
  }

  try {
    if (*check) return cmd_check(file, rc, out);
    if (*ascend) return cmd_ascend(file, rc, out);
    if (*diff) return cmd_diffcheck(file, selector, rc, out);
    if (*corpus) return cmd_corpus(file, rc, out);
  } catch (const InputError& e) {
    err << "input error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumericalError;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumericalError;
  }
  return kExitInputError;
}

}  // namespace mrules::cli
