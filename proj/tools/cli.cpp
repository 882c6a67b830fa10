#include "cli.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pcomp/bayes.hpp"
#include "pcomp/csv.hpp"
#include "pcomp/engine.hpp"
#include "pcomp/ising.hpp"
#include "pcomp/knapsack.hpp"
#include "pcomp/mc_integrate.hpp"
#include "pcomp/qmc.hpp"
#include "pcomp/rng.hpp"
#include "pcomp/tfim.hpp"
#include "pcomp/version.hpp"

namespace pcomp::cli {
namespace {

using csv::format_number;

struct Common {
  std::uint64_t seed = engine::kDefaultSeed;
  std::string output = "-";
  std::string format = "csv";
  std::string backend = "longperiod";
  std::string subcommand;
  std::string config_hash;

  csv::Meta meta() const {
    return {{"tool", std::string("pcomp ") + PCOMP_VERSION},
            {"subcommand", subcommand},
            {"seed", std::to_string(seed)},
            {"backend", backend},
            {"config_hash", config_hash}};
  }
  char separator() const { return format == "csv" ? ',' : ' '; }
  RngBackend rng() const { return {parse_rng_kind(backend), seed}; }
};

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open for reading");
  return in;
}

template <typename Parse>
auto parse_file(const std::string& path, Parse parse) {
  auto in = open_input(path);
  try {
    return parse(in);
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

std::vector<double> read_numbers(const std::string& path) {
  auto in = open_input(path);
  std::vector<double> xs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;
    try {
      xs.push_back(csv::parse_number(tok));
    } catch (const std::exception&) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": not a number");
    }
  }
  return xs;
}

std::string bitstring(const std::vector<std::uint8_t>& bits) {
  std::string s;
  for (auto b : bits) s += b ? '1' : '0';
  return s;
}

std::string spinstring(const ising::Spins& s) {
  std::string out;
  for (auto x : s) out += x == 1 ? '1' : '0';
  return out;
}

// ---------------------------------------------------------------------------

struct IntegrateOpts {
  std::string terms, weights;
  std::size_t samples = 10000;
};

void run_integrate(const Common& c, const IntegrateOpts& o, std::ostream& out) {
  auto terms = read_numbers(o.terms);
  if (terms.empty()) throw std::runtime_error(o.terms + ": no terms");
  auto proposal = o.weights.empty() ? mc::Proposal::uniform(terms.size())
                                    : mc::Proposal::categorical(read_numbers(o.weights));
  const auto problem = mc::SumProblem::from_terms(std::move(terms), std::move(proposal));
  auto rng = c.rng();
  const auto est = mc::mc_estimate(problem, o.samples, rng);
  std::string exact;
  if (problem.size() <= mc::kExactSumLimit) exact = format_number(mc::exact_sum(problem));
  csv::Writer w(out, {"estimate", "stderr", "exact"}, c.meta(), c.separator());
  w.row({format_number(est.value), format_number(est.std_error), exact});
}

struct BayesOpts {
  std::string net, pair;
  std::size_t family = 0, couples = 1, children = 1;
  std::size_t samples = 10000, every = 1;
};

void run_bayes(const Common& c, const BayesOpts& o, std::ostream& out) {
  bayes::BayesNet net;
  if (!o.net.empty()) {
    net = parse_file(o.net, [](std::istream& in) { return bayes::parse_net(in); });
  } else if (o.family > 0) {
    net = bayes::build_family_tree({o.family, o.couples, o.children, bayes::FamilyTreeSpec::Pairing::MarryIn});
  } else {
    throw std::runtime_error("bayes needs --net or --family");
  }
  if (auto diags = bayes::validate(net); !diags.empty()) throw std::runtime_error("invalid network: " + diags.front().message);
  const auto comma = o.pair.find(',');
  if (comma == std::string::npos) throw std::runtime_error("--pair expects a,b");
  const std::size_t a = net.index_of(o.pair.substr(0, comma));
  const std::size_t b = net.index_of(o.pair.substr(comma + 1));

  auto rng = c.rng();
  bayes::Correlation corr;
  std::vector<std::uint8_t> bits;
  csv::Writer w(out, {"sample", "bits", "correlation"}, c.meta(), c.separator());
  for (std::size_t k = 0; k < o.samples; ++k) {
    bayes::ancestral_sample(net, rng, bits);
    corr.add(bayes::bipolar(bits[a]), bayes::bipolar(bits[b]));
    if ((k + 1) % o.every == 0 || k + 1 == o.samples)
      w.row({std::to_string(k), bitstring(bits), corr.defined() ? format_number(corr.value()) : ""});
  }
}

struct KnapsackOpts {
  std::string instance, trace;
  std::size_t samples = 100000, k = 8, trace_every = 1000;
  double beta_start = 0.001, beta_end = 10.0;
  bool dp = false;
};

void run_knapsack(const Common& c, const KnapsackOpts& o, std::ostream& out) {
  const auto inst = parse_file(o.instance, [](std::istream& in) { return knapsack::parse_instance(in); });
  auto rng = c.rng();
  const auto schedule = o.beta_start == o.beta_end ? Schedule::constant(o.beta_start)
                                                   : Schedule::geometric(o.beta_start, o.beta_end);
  const auto result = knapsack::solve(inst, schedule, o.samples, o.k, rng, o.trace_every);
  std::vector<std::string> header{"best_value", "selection", "accepted"};
  std::vector<std::string> row{format_number(result.best_value), bitstring(result.best), std::to_string(result.accepted)};
  if (o.dp) {
    header.push_back("dp_optimum");
    row.push_back(format_number(knapsack::dp_solve(inst).value));
  }
  csv::Writer w(out, header, c.meta(), c.separator());
  w.row(row);
  if (!o.trace.empty()) {
    std::ofstream tf(o.trace);
    if (!tf) throw std::runtime_error(o.trace + ": cannot open for writing");
    csv::Writer tw(tf, {"step", "best_value"}, c.meta());
    for (std::size_t t = 0; t < result.trace.size(); ++t)
      tw.row({std::to_string((t + 1) * o.trace_every), format_number(result.trace[t])});
    if (!tf) throw std::runtime_error(o.trace + ": write failed");
  }
}

struct IsingOpts {
  std::string model, mode = "sample", sampler = "gibbs";
  std::vector<std::string> clamps;
  std::size_t sweeps = 1000;
  double beta_start = 0.1, beta_end = 5.0;
};

void run_ising(const Common& c, const IsingOpts& o, std::ostream& out) {
  const auto model = parse_file(o.model, [](std::istream& in) { return ising::parse_model(in); });
  ising::ClampSet clamps;
  for (const auto& spec : o.clamps) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) throw std::runtime_error("--clamp expects i=value");
    const auto i = static_cast<std::size_t>(std::stoul(spec.substr(0, eq)));
    const int v = std::stoi(spec.substr(eq + 1));
    if (i >= model.size()) throw std::runtime_error("--clamp index out of range");
    if (v != 1 && v != ising::low_spin(model.convention())) throw std::runtime_error("--clamp value does not match convention");
    clamps.clamp(i, v);
  }
  auto rng = c.rng();
  const std::size_t n = model.size();
  if (o.mode == "sample") {
    std::vector<std::string> header{"sweep", "energy"};
    for (std::size_t i = 0; i < n; ++i) header.push_back("s" + std::to_string(i));
    csv::Writer w(out, header, c.meta(), c.separator());
    ising::Spins s(n, static_cast<std::int8_t>(ising::low_spin(model.convention())));
    clamps.apply(s);
    std::vector<double> row(n + 2);
    for (std::size_t t = 0; t < o.sweeps; ++t) {
      if (o.sampler == "gibbs") {
        ising::gibbs_sweep(model, s, clamps, rng);
      } else {
        for (std::size_t k = 0; k < n; ++k) ising::mh_step(model, s, rng, clamps);
      }
      row[0] = static_cast<double>(t);
      row[1] = model.energy(s);
      for (std::size_t i = 0; i < n; ++i) row[i + 2] = s[i];
      w.row(row);
    }
  } else {
    csv::Writer w(out, {"sweep", "beta", "energy", "best_energy", "best_state"}, c.meta(), c.separator());
    double best = std::numeric_limits<double>::infinity();
    std::string best_state;
    ising::anneal(model, Schedule::geometric(o.beta_start, o.beta_end), o.sweeps, rng, clamps,
                  [&](std::size_t t, double beta, const ising::Spins& s, double e) {
                    if (e < best) {
                      best = e;
                      best_state = spinstring(s);
                    }
                    w.row({std::to_string(t), format_number(beta), format_number(e), format_number(best), best_state});
                  });
  }
}

struct QmcOpts {
  std::string circuit, proposal = "uniform";
  std::size_t target = 0, samples = 10000;
};

void run_qmc(const Common& c, const QmcOpts& o, std::ostream& out) {
  const auto circuit = parse_file(o.circuit, [](std::istream& in) { return qmc::parse_circuit(in); });
  auto rng = c.rng();
  const auto prop = o.proposal == "uniform" ? qmc::PathProposal::Uniform : qmc::PathProposal::Magnitude;
  const auto est = qmc::feynman_path_sample(circuit, o.target, o.samples, rng, prop);
  std::string ere, eim;
  if (circuit.qubits() <= qmc::kMaxStateVectorQubits) {
    const auto exact = qmc::brute_force_amplitude(circuit, o.target);
    ere = format_number(exact.real());
    eim = format_number(exact.imag());
  }
  csv::Writer w(out, {"estimate_re", "estimate_im", "stderr", "average_sign", "samples", "exact_re", "exact_im"},
                c.meta(), c.separator());
  w.row({format_number(est.amplitude.real()), format_number(est.amplitude.imag()), format_number(est.std_error),
         format_number(est.average_sign), std::to_string(est.samples), ere, eim});
}

struct TfimOpts {
  std::string config, mode = "sample";
  std::size_t sweeps = 1000, thin = 10, burn_in = 1000;
  bool exact = false;
};

void run_tfim(const Common& c, const TfimOpts& o, std::ostream& out) {
  const auto cfg = parse_file(o.config, [](std::istream& in) { return tfim::parse_config(in); });
  const auto& p = cfg.problem;
  auto rng = c.rng();
  if (o.mode == "sample") {
    const auto samples = tfim::tfim_sample(p, o.sweeps, rng, {o.burn_in, o.thin});
    std::optional<tfim::ThermalAverages> exact;
    if (o.exact) exact = tfim::exact_tfim_oracle(p);
    std::vector<std::string> header{"L", "zz_correlation"};
    if (exact) header.emplace_back("exact");
    csv::Writer w(out, header, c.meta(), c.separator());
    for (std::size_t L = 0; L < p.n; ++L) {
      std::vector<std::string> row{std::to_string(L), format_number(tfim::zz_correlation(samples, L))};
      if (exact) row.push_back(format_number(exact->zz_distance(L)));
      w.row(row);
    }
  } else {
    const auto gamma = cfg.gamma_schedule.value_or(Schedule::linear(p.gamma, 0.01 * p.gamma));
    const auto beta = cfg.beta_schedule.value_or(Schedule::constant(p.beta));
    const auto result = tfim::quantum_anneal(p, gamma, beta, o.sweeps, rng);
    csv::Writer w(out, {"energy", "state"}, c.meta(), c.separator());
    w.row({format_number(result.energy), spinstring(result.state)});
  }
}

struct BenchOpts {
  std::string kernel = "identity", model;
  std::size_t samples = 1000000, chains = 1, burn_in = 0, thin = 1, bits = 1;
  std::optional<double> fc;
  bool threads = false;
};

void run_bench(const Common& c, const BenchOpts& o, std::ostream& out) {
  engine::RunConfig cfg;
  cfg.samples = o.samples;
  cfg.chains = o.chains;
  cfg.burn_in = o.burn_in;
  cfg.thinning = o.thin;
  cfg.master_seed = c.seed;
  cfg.backend = parse_rng_kind(c.backend);
  cfg.concurrent = o.threads;
  cfg.keep_trace = false;

  std::optional<ising::IsingModel> model;
  if (o.kernel == "ising") {
    if (o.model.empty()) throw std::runtime_error("bench --kernel ising needs --model");
    model = parse_file(o.model, [](std::istream& in) { return ising::parse_model(in); });
  }
  const auto start = std::chrono::steady_clock::now();
  engine::SampleStats stats;
  if (model) stats = engine::run_parallel(ising::GibbsPBitKernel(*model), cfg);
  else stats = engine::run_parallel(engine::IdentityKernel(o.bits), cfg);
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
  const double seconds = std::max(elapsed.count(), std::numeric_limits<double>::min());
  const auto report = engine::throughput_report(seconds, cfg, o.fc);

  auto meta = c.meta();
  meta.emplace_back("elapsed_seconds", format_number(report.elapsed_seconds));
  meta.emplace_back("samples_per_second", format_number(report.samples_per_second));
  csv::Writer w(out, {"kernel", "chains", "samples_per_chain", "total_samples", "mean_" + stats.names().at(0),
                      "ideal_samples_per_second"},
                meta, c.separator());
  w.row({o.kernel, std::to_string(cfg.chains), std::to_string(cfg.samples), std::to_string(report.total_samples),
         format_number(stats.mean(0)),
         report.ideal_samples_per_second ? format_number(*report.ideal_samples_per_second) : ""});
  if (c.format != "csv")
    out << "elapsed_seconds " << format_number(report.elapsed_seconds) << "\nsamples_per_second "
        << format_number(report.samples_per_second) << '\n';
}

// ---------------------------------------------------------------------------

std::string canonical_config(const std::vector<std::string>& args) {
  std::string s;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--output" || args[i] == "-o") {
      ++i;
      continue;
    }
    if (args[i].rfind("--output=", 0) == 0) continue;
    s += args[i];
    s += '\x1f';
  }
  return s;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"pcomp: probabilistic-computer emulator", "pcomp"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("pcomp ") + PCOMP_VERSION);

  Common common;
  if (const char* env = std::getenv("PCOMP_SEED")) {
    try {
      common.seed = std::stoull(env);
    } catch (const std::exception&) {
      err << "pcomp: PCOMP_SEED is not an unsigned integer\n";
      return 2;
    }
  }

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", common.seed, "64-bit master seed (default 20211 or $PCOMP_SEED)");
    sub->add_option("-o,--output", common.output, "output path, '-' for stdout");
    sub->add_option("--format", common.format, "csv or plain")->check(CLI::IsMember({"csv", "plain"}));
    sub->add_option("--backend", common.backend, "random backend")->check(CLI::IsMember({"lfsr32", "longperiod", "counter"}));
  };
  const auto positive = CLI::Range(std::size_t{1}, std::numeric_limits<std::size_t>::max());
  const auto at_least_two = CLI::Range(std::size_t{2}, std::numeric_limits<std::size_t>::max());

  std::function<void(std::ostream&)> action;

  IntegrateOpts io;
  auto* integrate = app.add_subcommand("integrate", "Monte Carlo estimate of a sum of terms");
  integrate->add_option("--terms", io.terms, "file with one term per line")->required()->check(CLI::ExistingFile);
  integrate->add_option("--weights", io.weights, "proposal weights, one per line")->check(CLI::ExistingFile);
  integrate->add_option("--samples", io.samples, "samples (>= 2)")->check(at_least_two);
  add_common(integrate);
  integrate->callback([&] { action = [&](std::ostream& o) { run_integrate(common, io, o); }; });

  BayesOpts bo;
  auto* bayes_cmd = app.add_subcommand("bayes", "ancestral sampling of a Bayesian network");
  auto* net_opt = bayes_cmd->add_option("--net", bo.net, "network file")->check(CLI::ExistingFile);
  auto* fam_opt = bayes_cmd->add_option("--family", bo.family, "build a family tree with this many generations")->check(positive);
  net_opt->excludes(fam_opt);
  bayes_cmd->add_option("--couples", bo.couples, "founder couples of the family tree")->check(positive);
  bayes_cmd->add_option("--children", bo.children, "children per couple")->check(positive);
  bayes_cmd->add_option("--pair", bo.pair, "node names a,b")->required();
  bayes_cmd->add_option("--samples", bo.samples, "samples")->check(positive);
  bayes_cmd->add_option("--every", bo.every, "write every k-th sample")->check(positive);
  add_common(bayes_cmd);
  bayes_cmd->callback([&] { action = [&](std::ostream& o) { run_bayes(common, bo, o); }; });

  KnapsackOpts ko;
  auto* knap = app.add_subcommand("knapsack", "MCMC knapsack solver");
  knap->add_option("--instance", ko.instance, "instance file")->required()->check(CLI::ExistingFile);
  knap->add_option("--samples", ko.samples, "chain steps")->check(positive);
  knap->add_option("--k", ko.k, "proposals per step (1 = Metropolis)")->check(positive);
  knap->add_option("--beta-start", ko.beta_start, "initial inverse temperature")->check(CLI::PositiveNumber);
  knap->add_option("--beta-end", ko.beta_end, "final inverse temperature")->check(CLI::PositiveNumber);
  knap->add_option("--trace", ko.trace, "write best-so-far trace CSV here");
  knap->add_option("--trace-every", ko.trace_every, "trace stride in steps")->check(positive);
  knap->add_flag("--dp", ko.dp, "also report the dynamic-programming optimum");
  add_common(knap);
  knap->callback([&] { action = [&](std::ostream& o) { run_knapsack(common, ko, o); }; });

  IsingOpts iso;
  auto* ising_cmd = app.add_subcommand("ising", "Boltzmann sampling or annealing of an Ising model");
  ising_cmd->add_option("--model", iso.model, "model file")->required()->check(CLI::ExistingFile);
  ising_cmd->add_option("--mode", iso.mode, "sample or anneal")->check(CLI::IsMember({"sample", "anneal"}));
  ising_cmd->add_option("--sampler", iso.sampler, "gibbs or mh")->check(CLI::IsMember({"gibbs", "mh"}));
  ising_cmd->add_option("--sweeps", iso.sweeps, "sweeps")->check(positive);
  ising_cmd->add_option("--clamp", iso.clamps, "clamp spin i to value (i=v), repeatable");
  ising_cmd->add_option("--beta-start", iso.beta_start, "anneal start beta")->check(CLI::PositiveNumber);
  ising_cmd->add_option("--beta-end", iso.beta_end, "anneal end beta")->check(CLI::PositiveNumber);
  add_common(ising_cmd);
  ising_cmd->callback([&] { action = [&](std::ostream& o) { run_ising(common, iso, o); }; });

  QmcOpts qo;
  auto* qmc_cmd = app.add_subcommand("qmc", "Feynman-path estimate of a circuit amplitude");
  qmc_cmd->add_option("--circuit", qo.circuit, "circuit file")->required()->check(CLI::ExistingFile);
  qmc_cmd->add_option("--target", qo.target, "output basis state index");
  qmc_cmd->add_option("--samples", qo.samples, "path samples (>= 2)")->check(at_least_two);
  qmc_cmd->add_option("--proposal", qo.proposal, "uniform or magnitude")->check(CLI::IsMember({"uniform", "magnitude"}));
  add_common(qmc_cmd);
  qmc_cmd->callback([&] { action = [&](std::ostream& o) { run_qmc(common, qo, o); }; });

  TfimOpts to;
  auto* tfim_cmd = app.add_subcommand("tfim", "transverse-field Ising model by replica sampling");
  tfim_cmd->add_option("--config", to.config, "TFIM config file")->required()->check(CLI::ExistingFile);
  tfim_cmd->add_option("--mode", to.mode, "sample or anneal")->check(CLI::IsMember({"sample", "anneal"}));
  tfim_cmd->add_option("--sweeps", to.sweeps, "kept samples (sample) or sweeps (anneal)")->check(positive);
  tfim_cmd->add_option("--thin", to.thin, "sweeps between kept samples")->check(positive);
  tfim_cmd->add_option("--burn-in", to.burn_in, "sweeps discarded first");
  tfim_cmd->add_flag("--exact", to.exact, "add exact-diagonalization column (n <= 8)");
  add_common(tfim_cmd);
  tfim_cmd->callback([&] { action = [&](std::ostream& o) { run_tfim(common, to, o); }; });

  BenchOpts bn;
  auto* bench = app.add_subcommand("bench", "timed sampling throughput");
  bench->add_option("--kernel", bn.kernel, "identity or ising")->check(CLI::IsMember({"identity", "ising"}));
  bench->add_option("--model", bn.model, "model file for the ising kernel")->check(CLI::ExistingFile);
  bench->add_option("--bits", bn.bits, "p-bits of the identity kernel")->check(positive);
  bench->add_option("--samples", bn.samples, "kept samples per chain")->check(positive);
  bench->add_option("--chains", bn.chains, "parallel chains")->check(positive);
  bench->add_option("--burn-in", bn.burn_in, "discarded steps per chain");
  bench->add_option("--thin", bn.thin, "keep every k-th step")->check(positive);
  bench->add_option("--fc", bn.fc, "hypothetical clock frequency in Hz for the ideal rate")->check(CLI::PositiveNumber);
  bench->add_flag("--threads", bn.threads, "run chains on separate threads");
  add_common(bench);
  bench->callback([&] { action = [&](std::ostream& o) { run_bench(common, bn, o); }; });

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "pcomp: " << e.what() << '\n';
    return e.get_exit_code() ? e.get_exit_code() : 2;
  }
  for (auto* sub : app.get_subcommands()) common.subcommand = sub->get_name();
  common.config_hash = csv::hex64(csv::fnv1a(canonical_config(args)));

  try {
    if (common.output == "-") {
      action(out);
    } else {
      std::ofstream file(common.output);
      if (!file) throw std::runtime_error(common.output + ": cannot open for writing");
      action(file);
      file.flush();
      if (!file) throw std::runtime_error(common.output + ": write failed");
    }
  } catch (const std::exception& e) {
    err << "pcomp " << common.subcommand << ": " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace pcomp::cli
