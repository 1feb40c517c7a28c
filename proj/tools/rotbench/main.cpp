#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"

namespace {

struct Flags {
  rotbench::Args args;
  std::string strict = "on";
  std::string config;
  CLI::Option* kind = nullptr;
  CLI::Option* threads = nullptr;
  CLI::Option* T[4] = {};
  CLI::Option* m_b_cap = nullptr;
};

void add_shared(CLI::App& sub, Flags& f) {
  auto& a = f.args;
  sub.add_option("--algo", a.algo, "naive|wavefront|blocked|fused|kernel|kernel-prepacked")
      ->check(CLI::IsMember(
          {"naive", "wavefront", "blocked", "fused", "kernel", "kernel-prepacked"}));
  f.kind = sub.add_option("--kind", a.kind, "rotation|reflector")
               ->check(CLI::IsMember({"rotation", "reflector"}));
  sub.add_option("--m", a.m, "rows (default: n)");
  sub.add_option("--n", a.n, "columns");
  sub.add_option("--k", a.k, "number of sequences");
  sub.add_option("--sweep", a.sweep, "start:stop:step over n, with m = n");
  sub.add_option("--mr", a.shape.m_r, "kernel row tile")->check(CLI::PositiveNumber);
  sub.add_option("--kr", a.shape.k_r, "kernel lanes per wave")->check(CLI::PositiveNumber);
  sub.add_option("--nb", a.plan.n_b, "waves per kernel call (0: planner)");
  sub.add_option("--kb", a.plan.k_b, "sequences per chunk (0: planner)");
  sub.add_option("--mb", a.plan.m_b, "rows per row block (0: planner)");
  f.T[0] = sub.add_option("--T1", a.cache.T1, "L1 capacity in doubles");
  f.T[1] = sub.add_option("--T2", a.cache.T2, "L2 capacity in doubles");
  f.T[2] = sub.add_option("--T3", a.cache.T3, "L3 capacity in doubles");
  f.T[3] = sub.add_option("--S", a.cache.S, "fast memory size for the I/O model");
  f.m_b_cap = sub.add_option("--mb-cap", a.cache.m_b_cap, "upper limit on the planned m_b");
  f.threads = sub.add_option("--threads", a.threads, "worker threads")->check(CLI::PositiveNumber);
  sub.add_option("--reps", a.reps, "timed repetitions")->check(CLI::PositiveNumber);
  sub.add_option("--seed", a.seed, "input seed");
  sub.add_option("--strict-arith", f.strict, "on|off")->check(CLI::IsMember({"on", "off"}));
  sub.add_option("--csv", a.csv, "CSV output path (default: stdout)");
  sub.add_option("--config", f.config, "key=value cache description")
      ->check(CLI::ExistingFile);
  sub.add_flag("--verify-all", a.verify_all, "verify at every size");
  sub.add_flag("--csv-extended", a.csv_extended, "append m,k,algo,threads,seconds,verified");
  sub.add_flag("--io", a.io, "print the I/O model");
  sub.add_flag("--inject-fault", a.inject_fault)->group("");
}

// Values from --config, then explicit flags on top.
bool apply_config(Flags& f) {
  if (f.config.empty()) return true;
  rotseq_cache loaded;
  rotseq_cache_defaults(&loaded);
  std::size_t threads = 1;
  if (rotseq_config_load(f.config.c_str(), &loaded, &threads) != ROTSEQ_OK) {
    std::cerr << "rotbench: " << rotseq_last_error() << '\n';
    return false;
  }
  auto& c = f.args.cache;
  if (!f.T[0]->count()) c.T1 = loaded.T1;
  if (!f.T[1]->count()) c.T2 = loaded.T2;
  if (!f.T[2]->count()) c.T3 = loaded.T3;
  if (!f.T[3]->count()) c.S = loaded.S;
  if (!f.m_b_cap->count()) c.m_b_cap = loaded.m_b_cap;
  if (!f.threads->count()) f.args.threads = threads;
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Benchmark and model harness for rotation-sequence kernels", "rotbench"};
  app.require_subcommand(1);

  Flags run_f, verify_f, model_f;
  for (Flags* f : {&run_f, &verify_f, &model_f}) rotseq_cache_defaults(&f->args.cache);

  auto* run = app.add_subcommand("run", "time one algorithm over a size sweep");
  auto* verify = app.add_subcommand("verify", "equivalence grid against the naive order");
  auto* model = app.add_subcommand("model", "block plan, memory-operation and I/O models");
  add_shared(*run, run_f);
  add_shared(*verify, verify_f);
  add_shared(*model, model_f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? rotbench::kOk : rotbench::kUsage;
  }

  Flags& f = run->parsed() ? run_f : verify->parsed() ? verify_f : model_f;
  f.args.strict = f.strict == "on";
  f.args.kind_given = f.kind->count() > 0;
  if (!apply_config(f)) return rotbench::kUsage;
  rotseq_testing_inject_fault(f.args.inject_fault ? 1 : 0);

  if (run->parsed()) return rotbench::cmd_run(f.args);
  if (verify->parsed()) return rotbench::cmd_verify(f.args);
  return rotbench::cmd_model(f.args);
}
