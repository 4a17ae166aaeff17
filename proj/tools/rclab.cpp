// Command-line front end: robustness checks, simulations, scenario
// validation and corpus listing.
//
// Exit codes: 0 ok, 1 invalid input, 2 robustness violation, 3 no convergence.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "rclab/rclab.hpp"

namespace fs = std::filesystem;
using namespace rclab;

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kViolation = 2;
constexpr int kNoConvergence = 3;

#ifndef RCLAB_DEFAULT_CORPUS
#define RCLAB_DEFAULT_CORPUS "corpus"
#endif

fs::path corpus_root(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("RCLAB_CORPUS")) return env;
  return RCLAB_DEFAULT_CORPUS;
}

int check_robustness(const std::string& topo_file, int r, int l, int f, const std::string& leaders_csv,
                     bool strict_relays, bool maximal) {
  const Topology topo = load_topology(topo_file);
  RobustnessQuery q;
  q.schedule = topo.schedule;
  q.leaders = topo.leaders;
  if (!leaders_csv.empty()) {
    q.leaders = NodeSet{};
    std::stringstream ss(leaders_csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      const int id = std::stoi(tok);
      if (id < 1 || id > topo.schedule.node_count()) throw ConfigError("--leaders", "node id " + tok + " out of range");
      q.leaders.insert(id);
    }
  }
  q.r = r;
  q.l = l;
  q.f = f;
  q.relay = strict_relays ? RelayPolicy::outside_set : RelayPolicy::unrestricted;
  q.certificate_form = maximal ? CertificateForm::maximal : CertificateForm::smallest;
  const auto verdict = is_jointly_robust_following(q);
  std::cout << "topology: " << (topo.name.empty() ? topo_file : topo.name) << '\n' << format_verdict(q, verdict);
  return verdict.holds ? kOk : kViolation;
}

int simulate(const std::string& file, const std::string& out_dir, std::optional<double> tol,
             std::optional<long long> max_rounds, std::optional<long long> rounds, bool messages, bool summary) {
  auto ls = load_scenario(file);
  auto& sc = ls.scenario;
  if (tol) sc.options.tol = *tol;
  if (max_rounds) sc.options.max_rounds = *max_rounds;
  if (rounds) sc.options.rounds = *rounds;

  std::ofstream msg_out;
  RoundObserver obs;
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    if (messages) {
      msg_out.open(fs::path(out_dir) / (sc.name + "_messages.csv"));
      obs = messages_csv_writer(msg_out);
    }
  }
  const Trace t = run(sc, obs);
  long long settle = 0;
  for (const auto& r : sc.reference) settle = std::max(settle, r.last_change());
  const auto rep = convergence_report(t, sc.options.tol, sc.options.window, settle);
  if (!out_dir.empty()) {
    std::ofstream st(fs::path(out_dir) / (sc.name + "_states.csv"));
    write_states_csv(st, t);
    std::ofstream sm(fs::path(out_dir) / (sc.name + "_summary.txt"));
    sm << format_report(t, rep);
  }
  if (summary || out_dir.empty()) std::cout << format_report(t, rep);
  return rep.converged ? kOk : kNoConvergence;
}

int validate(const std::string& file) {
  const auto ls = load_scenario(file);
  const auto issues = validate_scenario(ls.scenario);
  if (issues.empty()) {
    std::cout << file << ": valid\n";
    return kOk;
  }
  for (const auto& i : issues) std::cout << file << ": " << i << '\n';
  return kInvalid;
}

int corpus_list(const fs::path& root) {
  if (!fs::is_directory(root)) {
    std::cerr << "corpus directory not found: " << root << '\n';
    return kInvalid;
  }
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto& p : files) {
    const json j = detail::read_json_file(p);
    const std::string kind = j.value("format", std::string()) == kScenarioFormat ? "scenario" : "topology";
    std::cout << kind << "  " << fs::relative(p, root).string() << "  " << j.value("name", std::string()) << "  "
              << j.value("description", std::string()) << '\n';
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Resilient leader-follower consensus: robustness checks and simulations"};
  app.require_subcommand(1);

  std::string topo_file, leaders;
  int r = 1, l = 1, f = 0;
  bool strict = false, maximal = false;
  auto* chk = app.add_subcommand("check-robustness", "Decide jointly r-robust following with l hops");
  chk->add_option("--topology,topology", topo_file, "Topology schedule file")->required();
  chk->add_option("--r", r, "Robustness parameter")->check(CLI::PositiveNumber);
  chk->add_option("--l", l, "Relay hop count")->check(CLI::PositiveNumber);
  chk->add_option("--f", f, "Local adversary bound")->check(CLI::NonNegativeNumber);
  chk->add_option("--leaders", leaders, "Comma-separated leader ids overriding the file");
  chk->add_flag("--leaders-from-file", "Use the leader set stored in the topology file (default)");
  chk->add_flag("--relays-outside-set", strict, "Forbid relays inside the follower set");
  chk->add_flag("--maximal-certificate", maximal, "Report the maximal violating follower set");

  std::string scen_file, out_dir, format = "csv";
  std::optional<double> tol;
  std::optional<long long> max_rounds, rounds;
  bool messages = false, summary = false;
  auto* sim = app.add_subcommand("simulate", "Run a scenario");
  sim->add_option("--scenario,scenario", scen_file, "Scenario file")->required();
  sim->add_option("--out-dir", out_dir, "Directory for trace files");
  sim->add_option("--tol", tol, "Convergence tolerance");
  sim->add_option("--max-rounds", max_rounds, "Round budget");
  sim->add_option("--rounds", rounds, "Run exactly this many rounds");
  sim->add_option("--format", format, "Trace format")->check(CLI::IsMember({"csv"}));
  sim->add_flag("--messages", messages, "Also write every delivered message");
  sim->add_flag("--summary", summary, "Print the convergence report");

  std::string val_file;
  auto* val = app.add_subcommand("validate", "Cross-check a scenario without simulating");
  val->add_option("--scenario,scenario", val_file, "Scenario file")->required();

  std::string corpus_dir;
  auto* corpus = app.add_subcommand("corpus", "Shipped topologies and scenarios");
  auto* list = corpus->add_subcommand("list", "List corpus files");
  corpus->require_subcommand(1);
  list->add_option("--dir", corpus_dir, "Corpus directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  }

  try {
    if (*chk) return check_robustness(topo_file, r, l, f, leaders, strict, maximal);
    if (*sim) return simulate(scen_file, out_dir, tol, max_rounds, rounds, messages, summary);
    if (*val) return validate(val_file);
    if (*list) return corpus_list(corpus_root(corpus_dir));
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  }
  return kInvalid;
}
