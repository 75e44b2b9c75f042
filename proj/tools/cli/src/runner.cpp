#include "malin/cli/runner.hpp"

#include "malin/errors.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <ctime>
#include <exception>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

namespace malin::cli {

namespace {

SectionMeshOptions mesh_options(const ExperimentConfig& c) {
  SectionMeshOptions m;
  m.relative_size = c.mesh.relative_size;
  m.refinements = c.mesh.refinements;
  m.resolution = c.mesh.resolution;
  return m;
}

int resolution(const ExperimentConfig& c, int n) {
  return c.mesh.resolution > 0 ? c.mesh.resolution : (n == 2 ? 256 : 400);
}

// A finite number, or the key is left out (JSON has no NaN or infinity).
void put(nlohmann::json& j, const std::string& key, double v) {
  if (std::isfinite(v)) j[key] = v;
}

void check(Record& r, const std::string& name, bool pass, double value, double limit) {
  r.checks.push_back(Check{name, pass, std::isfinite(value) ? value : 0.0, limit});
}

RescaledProblem normalized(const SectionSpec& spec, const ProblemData& data, const ExperimentConfig& c) {
  const Polytope body = extract_section(spec, resolution(c, spec.potential->dimension()));
  return rescale_problem(data, spec, john_normalize(body).map);
}

void run_geometry(const Task& t, const PotentialPtr& pot, const Vector& x0, Record& rec) {
  const ExperimentConfig& c = *t.config;
  const double h = t.scales.front();
  const GeometryReport g = geometry_report(pot, x0, h, c.alpha, c.mesh.resolution > 0 ? c.mesh.resolution : 1024);
  auto& m = rec.report.measured;
  m["h"] = h;
  m["volume"] = g.volume;
  m["ratio"] = g.ratio;
  m["inner_r"] = g.inner_radius;
  m["outer_r"] = g.outer_radius;
  m["ball_radius"] = g.ball_radius;
  m["alpha"] = g.alpha_used;
  if (c.checks.ratio_value) {
    const double err = std::abs(g.ratio - *c.checks.ratio_value);
    check(rec, "ratio", err <= c.checks.ratio_tolerance, err, c.checks.ratio_tolerance);
  }
  const int n = pot->dimension();
  check(rec, "john position", g.inner_radius >= 1.0 - 1e-6 && g.outer_radius <= n + 1e-6, g.outer_radius,
        static_cast<double>(n));
}

void run_solve(const Task& t, const PotentialPtr& pot, const Vector& x0, const ProblemData& data, Record& rec) {
  const ExperimentConfig& c = *t.config;
  const double h = t.scales.front();
  const SectionSolve s = solve_on_section(SectionSpec{pot, x0, h}, data, mesh_options(c));
  const SolveResult& r = s.result;
  auto& m = rec.report.measured;
  m["h"] = h;
  m["nodes"] = s.mesh->node_count();
  m["simplices"] = s.mesh->simplex_count();
  m["h_mesh"] = s.mesh->h_mesh();
  m["residual"] = r.residual;
  m["weak_residual_sample"] = r.weak_residual_sample;
  m["iterations"] = r.iterations;
  m["method"] = r.method;
  put(m, "condition", r.condition_estimate);
  m["max_peclet"] = r.max_peclet;
  m["peclet_warning"] = r.peclet_warning;
  m["sup"] = r.solution.values().maxCoeff();
  m["inf"] = r.solution.values().minCoeff();
  rec.report.mesh_hash = s.mesh->hash();
  if (r.peclet_warning) rec.report.notes.push_back("cell Peclet number above 2");
  if (c.data.exact) {
    const Expression e = *c.data.exact;
    m["l2_error"] = l2_error(r.solution, [&e](const Vector& x) { return e(x); });
  }
  check(rec, "residual", r.residual <= 1e-8, r.residual, 1e-8);
  if (data.homogeneous() && data.divB_certificate.nonpositive()) {
    const MaximumPrincipleReport mp = maximum_principle_check(r, data);
    m["maximum_principle"] = mp.pass;
    m["maximum_principle_violation"] = mp.violation;
    check(rec, "maximum principle", mp.pass, mp.violation, 0.0);
  }
}

void run_harnack(const Task& t, const PotentialPtr& pot, const Vector& x0, const ProblemData& data, Record& rec) {
  const ExperimentConfig& c = *t.config;
  const int n = pot->dimension();
  const double h = t.scales.front();
  const double r = c.r > 0 ? c.r : n;
  HarnackSetup setup;
  setup.section = SectionSpec{pot, x0, h};
  setup.t = c.t_ratio * h;
  setup.mesh = mesh_options(c);
  setup.r = r;
  setup.gamma = gamma_formula(n, r, c.alpha);
  const HarnackResult res = harnack_experiment(setup, data);
  auto& m = rec.report.measured;
  m["h"] = res.h;
  m["t"] = res.t;
  m["sup"] = res.sup;
  m["inf"] = res.inf;
  put(m, "quotient", res.quotient);
  m["data_norm"] = res.data_norm;
  m["gamma"] = res.gamma;
  m["data_term"] = res.data_term;
  m["h_mesh"] = res.h_mesh;
  m["nodes_inside"] = res.nodes_inside;
  rec.report.mesh_hash = res.mesh_hash;
  if (!std::isfinite(res.quotient)) rec.report.notes.push_back("inf <= 0 in an inhomogeneous run; quotient omitted");
  if (data.homogeneous()) check(rec, "quotient >= 1", res.quotient >= 1.0 - 1e-12, res.quotient, 1.0);
  if (c.checks.max_quotient) {
    check(rec, "max quotient", res.quotient <= *c.checks.max_quotient, res.quotient, *c.checks.max_quotient);
  }
}

void run_hoelder(const Task& t, const PotentialPtr& pot, const Vector& x0, const ProblemData& data, Record& rec) {
  const ExperimentConfig& c = *t.config;
  const double h0 = t.scales.front();
  const HoelderResult res = hoelder_experiment(pot, data, x0, h0, c.depth, mesh_options(c));
  auto& m = rec.report.measured;
  m["h0"] = h0;
  m["depth"] = c.depth;
  m["trace"] = {{"heights", res.trace.heights}, {"sup", res.trace.sup}, {"inf", res.trace.inf},
                {"osc", res.trace.osc}};
  m["ratios"] = res.ratios;
  m["gamma_osc"] = res.gamma_osc;
  m["amplitude"] = res.amplitude;
  m["beta"] = res.beta;
  m["recursion_holds"] = res.recursion_holds;
  m["early_stop"] = res.early_stop;
  m["h_mesh"] = res.h_mesh;
  rec.report.mesh_hash = res.mesh_hash;
  rec.report.scales = res.trace.heights;
  if (res.early_stop) rec.report.notes.push_back("oscillation below 1e-12; trace stopped early");
  if (!res.early_stop) {
    const SectionSolve s = solve_on_section(SectionSpec{pot, x0, 2 * h0}, data, mesh_options(c));
    const auto pairs = random_pairs_in_section(SectionLevel(pot, x0), h0, static_cast<std::size_t>(c.pairs), t.seed);
    const HoelderL2Report l2 = hoelder_l2_report(s, data, res.gamma_osc, pairs, c.r);
    m["hoelder_constant"] = l2.constant;
    m["hoelder_denominator"] = l2.denominator;
    m["pairs"] = l2.pairs;
    const double floor = c.checks.min_gamma.value_or(0.0);
    check(rec, "gamma_osc", res.gamma_osc > floor, res.gamma_osc, floor);
  }
}

void run_moser(const Task& t, const PotentialPtr& pot, const Vector& x0, ProblemData data, Record& rec) {
  const ExperimentConfig& c = *t.config;
  const int n = pot->dimension();
  const double h = t.scales.front();
  if (data.boundary_g) rec.report.notes.push_back("boundary data replaced by zero");
  data.boundary_g = {};
  const RescaledProblem rp = normalized(SectionSpec{pot, x0, h}, data, c);
  const SectionSolve s = solve_on_section(rp.section, rp.data, mesh_options(c));
  const double r = c.r > 0 ? c.r : n;
  double k = data_norm(*s.mesh, rp.data, r);
  if (!(k > 0.0)) {
    k = 1.0;
    rec.report.notes.push_back("zero data norm; k set to 1");
  }
  const MoserSchedule sched = moser_schedule(c.q, n);
  const MoserChain chain = moser_chain_audit(s.result.solution, k, sched, c.depth);
  const LogTransform lt = log_transform_bound(s.result.solution, k);
  auto& m = rec.report.measured;
  m["h"] = h;
  m["q"] = c.q;
  m["q_hat"] = sched.q_hat;
  m["chi"] = sched.chi;
  m["k"] = k;
  m["exponents"] = chain.exponents;
  m["norms"] = chain.norms;
  m["ratios"] = chain.ratios;
  m["sup_u_plus"] = chain.sup_u_plus;
  m["l2_u_plus"] = chain.l2_u_plus;
  m["terminal_ratio"] = chain.terminal_ratio;
  m["interpolation_ok"] = chain.interpolation_ok;
  m["interpolation_margin"] = chain.interpolation_margin;
  m["log_sup_w"] = lt.sup_w;
  m["log_identity"] = lt.identity_value;
  m["log_identity_ok"] = lt.identity_ok;
  m["log_l2_w"] = lt.l2_w;
  m["h_mesh"] = s.mesh->h_mesh();
  rec.report.mesh_hash = s.mesh->hash();
  check(rec, "interpolation inequality", chain.interpolation_ok, chain.interpolation_margin, 0.0);
  check(rec, "log identity", lt.identity_ok, lt.sup_w, lt.identity_value);
}

void run_sobolev(const Task& t, const PotentialPtr& pot, const Vector& x0, const ProblemData& data, Record& rec) {
  const ExperimentConfig& c = *t.config;
  const double h = t.scales.front();
  const SectionSpec sec = normalized(SectionSpec{pot, x0, h}, data, c).section;
  const MeshPtr mesh = mesh_section(sec, mesh_options(c));
  const SobolevResult res = sobolev_ratio(CofactorField(sec.potential), mesh, 0.0, c.random_members, t.seed);
  auto& m = rec.report.measured;
  m["h"] = h;
  m["p"] = res.p;
  m["max_ratio"] = res.max_ratio;
  m["members"] = nlohmann::json::array();
  for (const auto& mem : res.members) {
    nlohmann::json e{{"name", mem.name}, {"excluded", mem.excluded}};
    put(e, "ratio", mem.ratio);
    m["members"].push_back(e);
  }
  m["h_mesh"] = mesh->h_mesh();
  rec.report.mesh_hash = mesh->hash();
  check(rec, "finite ratio", std::isfinite(res.max_ratio) && res.max_ratio > 0.0, res.max_ratio, 0.0);
}

void run_global_linf(const Task& t, const PotentialPtr& pot, const Vector& x0, ProblemData data, Record& rec) {
  const ExperimentConfig& c = *t.config;
  if (data.boundary_g) rec.report.notes.push_back("boundary data replaced by zero");
  data.boundary_g = {};
  const GlobalLinfResult res = global_linf_experiment(pot, x0, t.scales, data, mesh_options(c), c.r);
  auto& m = rec.report.measured;
  m["rows"] = nlohmann::json::array();
  for (const auto& row : res.rows) {
    m["rows"].push_back({{"h", row.h}, {"linf", row.linf}, {"data_norm", row.data_norm}, {"ratio", row.ratio},
                         {"h_mesh", row.h_mesh}});
  }
  m["gamma_fit"] = res.gamma_fit;
  m["constant"] = res.constant;
  m["degenerate"] = res.degenerate;
  if (res.degenerate) {
    rec.report.notes.push_back("zero data: all-zero table");
  } else {
    const double floor = c.checks.min_gamma.value_or(0.0);
    check(rec, "gamma_fit", res.gamma_fit > floor, res.gamma_fit, floor);
  }
}

void run_interior_l2(const Task& t, const PotentialPtr& pot, const Vector& x0, const ProblemData& data,
                     Record& rec) {
  const ExperimentConfig& c = *t.config;
  const InteriorL2Result res = interior_l2_experiment(pot, x0, t.scales, data, mesh_options(c), c.r);
  auto& m = rec.report.measured;
  m["rows"] = nlohmann::json::array();
  for (const auto& row : res.rows) {
    m["rows"].push_back({{"h", row.h}, {"sup_half", row.sup_half}, {"l2", row.l2}, {"bracket", row.bracket},
                         {"ratio", row.ratio}});
  }
  m["band"] = res.band;
  const double limit = c.checks.max_band.value_or(10.0);
  check(rec, "ratio band", res.band <= limit, res.band, limit);
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
  return buf;
}

int classify(const std::exception_ptr& e, std::string& message) {
  try {
    std::rethrow_exception(e);
  } catch (const SchemaError& x) {
    message = std::string("schema violation at ") + x.what();
    return kSchemaError;
  } catch (const HypothesisError& x) {
    message = std::string("hypothesis violated: ") + x.what();
    return kHypothesisError;
  } catch (const NumericalError& x) {
    message = std::string("numerical failure: ") + x.what();
    return kNumericalError;
  } catch (const ContractError& x) {
    message = std::string("invalid input: ") + x.what();
    return kSchemaError;
  } catch (const std::exception& x) {
    message = std::string("numerical failure: ") + x.what();
    return kNumericalError;
  }
}

// Band checks that need every record of a config member.
void aggregate_checks(const std::vector<Task>& tasks, const std::vector<std::optional<Record>>& records,
                      std::vector<Check>& out) {
  std::map<const ExperimentConfig*, std::map<std::uint64_t, std::vector<double>>> groups;
  for (const auto& task : tasks) {
    const auto& rec = records[task.index];
    if (!rec || !task.config->checks.max_band) continue;
    const Kind k = task.config->kind;
    if (k != Kind::Harnack && k != Kind::Geometry) continue;
    const double v = rec->primary_value();
    if (std::isfinite(v)) groups[task.config][k == Kind::Harnack ? task.seed : 0].push_back(v);
  }
  for (const auto& [config, by_seed] : groups) {
    for (const auto& [seed, values] : by_seed) {
      // Harnack bands are taken after the first scale.
      const std::size_t first = config->kind == Kind::Harnack && values.size() > 1 ? 1 : 0;
      double lo = INFINITY, hi = 0.0;
      for (std::size_t i = first; i < values.size(); ++i) {
        lo = std::min(lo, values[i]);
        hi = std::max(hi, values[i]);
      }
      const double band = hi / lo;
      std::ostringstream name;
      name << to_string(config->kind) << " band" << (config->name.empty() ? "" : " " + config->name) << " seed "
           << seed;
      out.push_back(Check{name.str(), band <= *config->checks.max_band, band, *config->checks.max_band});
    }
  }
}

}  // namespace

std::vector<Task> plan(const ExperimentConfig& config) {
  std::vector<const ExperimentConfig*> members;
  if (config.kind == Kind::Sweep) {
    for (const auto& m : config.experiments) members.push_back(&m);
  } else {
    members.push_back(&config);
  }
  std::vector<Task> tasks;
  auto add = [&](const ExperimentConfig* c, std::vector<double> scales, std::uint64_t seed) {
    tasks.push_back(Task{tasks.size(), c, std::move(scales), seed});
  };
  for (const ExperimentConfig* c : members) {
    const auto reps = static_cast<std::uint64_t>(c->repeats);
    switch (c->kind) {
      case Kind::Geometry:
        for (double h : c->scales) add(c, {h}, c->seed);
        break;
      case Kind::Solve:
      case Kind::Harnack:
      case Kind::Moser:
      case Kind::Sobolev:
        for (double h : c->scales)
          for (std::uint64_t s = 0; s < reps; ++s) add(c, {h}, c->seed + s);
        break;
      case Kind::Hoelder:
        for (std::uint64_t s = 0; s < reps; ++s) add(c, {c->scales.front()}, c->seed + s);
        break;
      case Kind::GlobalLinf:
      case Kind::InteriorL2:
        for (std::uint64_t s = 0; s < reps; ++s) add(c, c->scales, c->seed + s);
        break;
      case Kind::Sweep:
        break;
    }
  }
  return tasks;
}

Record execute(const Task& task) {
  const ExperimentConfig& c = *task.config;
  const PotentialPtr pot = make_potential(c.potential);
  const Vector x0 = default_center(c, pot);
  const ProblemData data = make_problem(c.data, pot, x0, task.seed);

  Record rec;
  rec.index = task.index;
  rec.seed = task.seed;
  rec.name = c.name;
  rec.report.kind = to_string(c.kind);
  rec.report.family = pot->family_name();
  rec.report.label = pot->label();
  rec.report.scales = task.scales;
  rec.report.config_hash = config_hash(c.source);

  switch (c.kind) {
    case Kind::Geometry: run_geometry(task, pot, x0, rec); break;
    case Kind::Solve: run_solve(task, pot, x0, data, rec); break;
    case Kind::Harnack: run_harnack(task, pot, x0, data, rec); break;
    case Kind::Hoelder: run_hoelder(task, pot, x0, data, rec); break;
    case Kind::Moser: run_moser(task, pot, x0, data, rec); break;
    case Kind::Sobolev: run_sobolev(task, pot, x0, data, rec); break;
    case Kind::GlobalLinf: run_global_linf(task, pot, x0, data, rec); break;
    case Kind::InteriorL2: run_interior_l2(task, pot, x0, data, rec); break;
    case Kind::Sweep: throw ContractError("sweeps are expanded by plan()");
  }
  std::string why;
  const bool valid = rec.report.valid(&why);
  check(rec, "finite report", valid, valid ? 1.0 : 0.0, 1.0);
  if (!valid) rec.report.notes.push_back(why);
  return rec;
}

std::string record_file_name(const Record& record, const std::string& timestamp) {
  char idx[16];
  std::snprintf(idx, sizeof idx, "%05zu", record.index);
  return record.report.kind + "_" + record.report.family + "_" + timestamp + "_" + idx + ".json";
}

void apply_seed(ExperimentConfig& config, std::uint64_t seed) {
  config.seed = seed;
  for (auto& m : config.experiments) m.seed = seed;
}

RunSummary run(const ExperimentConfig& input, const RunOptions& options) {
  ExperimentConfig config = input;
  if (options.seed_override) apply_seed(config, *options.seed_override);
  std::ostream* log = options.log;
  RunSummary summary;

  const std::filesystem::path out_dir = options.out_dir.value_or(config.output);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec || !std::filesystem::is_directory(out_dir)) {
    summary.exit_code = kSchemaError;
    summary.error = "output directory " + out_dir.string() + " is not writable";
    return summary;
  }

  const std::vector<Task> tasks = plan(config);
  const std::string stamp = options.timestamp.empty() ? utc_timestamp() : options.timestamp;
  unsigned workers = options.workers ? options.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(1, tasks.size())));

  enum class State { Pending, Done, Failed, Skipped };
  std::vector<State> state(tasks.size(), State::Pending);
  std::vector<std::optional<Record>> records(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  std::mutex mutex;
  std::condition_variable ready;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      std::optional<Record> rec;
      std::exception_ptr err;
      if (!stop) {
        try {
          rec = execute(tasks[i]);
        } catch (...) {
          err = std::current_exception();
          stop = true;
        }
      }
      {
        std::lock_guard<std::mutex> lock(mutex);
        if (rec) {
          records[i] = std::move(rec);
          state[i] = State::Done;
        } else if (err) {
          errors[i] = err;
          state[i] = State::Failed;
        } else {
          state[i] = State::Skipped;
        }
      }
      ready.notify_all();
    }
  };

  // The single writer emits records in task order.
  std::string write_error;
  auto writer = [&] {
    std::map<std::string, std::ofstream> csv;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      std::unique_lock<std::mutex> lock(mutex);
      ready.wait(lock, [&] { return state[i] != State::Pending; });
      if (state[i] != State::Done) continue;
      const Record& rec = *records[i];
      lock.unlock();
      const std::filesystem::path file = out_dir / record_file_name(rec, stamp);
      std::ofstream(file) << rec.to_json().dump(2) << '\n';
      summary.files.push_back(file);
      const std::string& kind = rec.report.kind;
      if (!csv.count(kind)) {
        const std::filesystem::path path = out_dir / (kind + ".csv");
        const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
        csv[kind].open(path, std::ios::app);
        if (fresh) csv[kind] << Record::csv_header(kind) << '\n';
      }
      for (const auto& row : rec.csv_rows()) csv[kind] << row << '\n';
      if (!csv[kind]) write_error = "cannot write " + (out_dir / (kind + ".csv")).string();
      if (log) {
        *log << "[" << std::setw(4) << rec.index << "] " << kind << " " << rec.report.label << " h="
             << format_number(rec.report.scales.empty() ? 0.0 : rec.report.scales.front()) << " seed=" << rec.seed
             << " " << rec.primary_metric() << "=" << format_number(rec.primary_value())
             << (rec.passed() ? "" : "  CHECK FAILED") << '\n';
      }
    }
  };

  std::thread writer_thread(writer);
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  writer_thread.join();

  for (const auto& r : records) {
    if (r) ++summary.records;
  }
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (errors[i]) {
      summary.exit_code = classify(errors[i], summary.error);
      return summary;
    }
  }
  if (!write_error.empty()) {
    summary.exit_code = kNumericalError;
    summary.error = write_error;
    return summary;
  }

  std::vector<Check> aggregate;
  aggregate_checks(tasks, records, aggregate);
  for (const auto& r : records) {
    if (!r) continue;
    for (const auto& c : r->checks) {
      if (!c.pass) {
        ++summary.failed_checks;
        if (log) *log << "check failed: record " << r->index << " " << c.name << " value=" << format_number(c.value)
                      << " limit=" << format_number(c.limit) << '\n';
      }
    }
  }
  for (const auto& c : aggregate) {
    if (log) *log << (c.pass ? "check passed: " : "check failed: ") << c.name << " value=" << format_number(c.value)
                  << " limit=" << format_number(c.limit) << '\n';
    if (!c.pass) ++summary.failed_checks;
  }
  if (log) *log << summary.records << " records written to " << out_dir.string() << '\n';
  if (options.assert_mode && summary.failed_checks > 0) summary.exit_code = kAssertionFailed;
  return summary;
}

RunSummary run_file(const std::filesystem::path& config_file, const RunOptions& options) {
  ExperimentConfig config;
  try {
    config = load_config(config_file);
  } catch (const SchemaError& e) {
    RunSummary s;
    s.exit_code = kSchemaError;
    s.error = std::string("schema violation at ") + e.what();
    return s;
  }
  return run(config, options);
}

}  // namespace malin::cli
