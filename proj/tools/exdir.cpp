#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "exdir/decomposition.hpp"
#include "exdir/generators.hpp"
#include "exdir/graph.hpp"
#include "exdir/verification.hpp"
#include "nlohmann/json.hpp"

namespace {

using namespace exdir;

constexpr int kExitOk = 0;
constexpr int kExitVerifyFail = 1;
constexpr int kExitUsage = 2;
constexpr int kExitBudget = 3;

int g_log = 1;  // 0 silent, 1 info, 2 debug

DiGraph load_graph(const std::string& path) {
  if (path == "-") return parse_edge_list(std::cin);
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  return parse_edge_list(in);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path);
  out << text;
}

OracleKind parse_oracle(const std::string& s) {
  if (s == "auto") return OracleKind::Auto;
  if (s == "brute") return OracleKind::Brute;
  if (s == "cutmatching") return OracleKind::CutMatching;
  throw ParseError("unknown oracle '" + s + "'");
}

void dump_dot(const std::string& path, const DiGraph& host, const Decomposition& d) {
  std::vector<std::vector<Vertex>> classes;
  for (const auto& c : d.clusters) classes.push_back(c.verts);
  std::vector<EdgeId> drop = d.e_r;
  DiGraph cg = contract(view_of(host), classes, drop);
  std::ostringstream out;
  out << "digraph clusters {\n";
  for (int id : d.order)
    out << "  c" << id << " [label=\"c" << id << " (" << d.clusters[id].verts.size()
        << ")\"];\n";
  for (EdgeId e = 0; e < cg.edge_rows(); ++e)
    if (cg.alive(e)) out << "  c" << cg.tail(e) << " -> c" << cg.head(e) << ";\n";
  out << "}\n";
  write_file(path, out.str());
}

// quality floors for inline verification: weakest declared cluster values
std::pair<Rational, Rational> floors_of(const Decomposition& d) {
  Rational phi_f = d.phi, psi_f(1, 2);
  bool any = false;
  for (const auto& c : d.clusters) {
    if (c.trivial()) continue;
    any = true;
    phi_f = std::min(phi_f, c.phi);
    psi_f = std::min(psi_f, c.psi);
  }
  if (!any) return {d.phi, Rational(1, 2)};
  return {phi_f, psi_f};
}

int cmd_decompose(const std::string& input, const std::string& phi_s, uint64_t seed,
                  const std::string& oracle, int64_t h_override, int threads, bool verify,
                  const std::string& out_path, const std::string& dot_path) {
  DiGraph g = load_graph(input);
  Rational phi = Rational::parse(phi_s);
  DecompConfig cfg;
  cfg.oracle.seed = seed;
  cfg.kind = parse_oracle(oracle);
  if (cfg.kind == OracleKind::Brute) cfg.oracle.n_bf = kExactLimit;
  cfg.threads = threads;
  if (h_override > 0) cfg.h_max = h_override;
  if (g_log >= 2) cfg.oracle.trace = &std::cerr;
  Decomposition d = expander_decomposition(g, phi, cfg);

  std::vector<std::vector<Vertex>> classes;
  for (const auto& c : d.clusters) classes.push_back(c.verts);
  bool dag = is_dag(view_of(contract(view_of(g), classes, d.e_r)));
  Rational budget = d.beta * d.phi * Rational(g.alive_edges());
  if (g_log >= 1) {
    std::cout << "clusters: " << d.order.size() << "\n";
    std::cout << "e_r: " << d.e_r.size() << " (budget beta*phi*m = " << budget.str() << ")\n";
    std::cout << "dag: " << (dag ? "yes" : "NO") << "\n";
    std::cout << "psi: " << d.psi.str() << "\n";
  }
  if (!out_path.empty()) write_file(out_path, d.to_json());
  if (!dot_path.empty()) dump_dot(dot_path, g, d);
  if (verify) {
    auto [phi_f, psi_f] = floors_of(d);
    VerificationReport rep = verify_decomposition(g, d, d.beta, phi_f, psi_f, kExactLimit);
    rep.print_table(std::cout);
    if (!rep.overall()) return kExitVerifyFail;
  }
  return kExitOk;
}

int cmd_verify(const std::string& input, const std::string& decomp_path) {
  DiGraph g = load_graph(input);
  Decomposition d = Decomposition::from_json(slurp(decomp_path), g);
  for (EdgeId e : d.deleted) g.kill_edge(e);
  auto [phi_f, psi_f] = floors_of(d);
  VerificationReport rep = verify_decomposition(g, d, d.beta, phi_f, psi_f, kExactLimit);
  rep.print_table(std::cout);
  return rep.overall() ? kExitOk : kExitVerifyFail;
}

int cmd_prune(const std::string& input, const std::string& deletions_path,
              const std::string& phi_s, uint64_t seed, const std::string& oracle, int threads,
              bool verify, const std::string& out_path) {
  DiGraph g = load_graph(input);
  std::ifstream ds(deletions_path);
  if (!ds) throw ParseError("cannot open " + deletions_path);
  std::vector<EdgeId> stream = parse_deletion_stream(ds, g);
  Rational phi = Rational::parse(phi_s);
  DecompConfig cfg;
  cfg.oracle.seed = seed;
  cfg.kind = parse_oracle(oracle);
  if (cfg.kind == OracleKind::Brute) cfg.oracle.n_bf = kExactLimit;
  cfg.threads = threads;
  if (g_log >= 2) cfg.oracle.trace = &std::cerr;

  std::ofstream out;
  if (!out_path.empty()) {
    out.open(out_path);
    if (!out) throw ParseError("cannot write " + out_path);
  }
  Decomposition prev;
  int64_t prev_epoch = -1;
  bool verify_failed = false;
  std::vector<EdgeId> since_prev;
  int64_t epoch_deletions = 0, epoch_prunes = 0;

  auto on_snapshot = [&](const Decomposition& d, int64_t step, int64_t epoch) {
    bool full = step < 0 || epoch != prev_epoch || (step & 1023) == 0;
    if (out.is_open()) {
      nlohmann::ordered_json j;
      j["type"] = full ? "full" : "delta";
      j["step"] = step;
      j["epoch"] = epoch;
      if (full) {
        j["decomposition"] = nlohmann::ordered_json::parse(d.to_json());
      } else {
        j["deleted"] = std::vector<EdgeId>{d.deleted.back()};
        j["order"] = d.order;
        j["clusters_total"] = d.order.size();
        j["e_r_total"] = d.e_r.size();
      }
      out << j.dump() << "\n";
    }
    if (verify && step >= 0) {
      if (epoch == prev_epoch) {
        if (!verify_refinement(prev, d, since_prev)) {
          std::cerr << "refinement check failed at step " << step << "\n";
          verify_failed = true;
        }
      }
      auto [phi_f, psi_f] = floors_of(d);
      VerificationReport rep =
          verify_decomposition(g, d, d.beta * Rational(4), phi_f, psi_f, kExactLimit);
      if (!rep.overall()) {
        std::cerr << "decomposition check failed at step " << step << "\n";
        rep.print_table(std::cerr);
        verify_failed = true;
      }
    }
    if (epoch != prev_epoch && prev_epoch >= 0 && g_log >= 1) {
      std::cout << "epoch " << prev_epoch << ": deletions=" << epoch_deletions
                << " clusters=" << prev.order.size() << " restart\n";
      epoch_deletions = 0;
    }
    if (step >= 0) ++epoch_deletions;
    prev = d;
    prev_epoch = epoch;
    since_prev.clear();
    if (step >= 0 && !d.deleted.empty()) since_prev.push_back(d.deleted.back());
  };

  MaintainStats stats;
  try {
    stats = maintain(g, phi, stream, cfg, on_snapshot);
  } catch (const BudgetExceeded& ex) {
    std::cerr << "budget exceeded: " << ex.what() << "\n";
    return kExitBudget;
  }
  (void)epoch_prunes;
  if (g_log >= 1) {
    std::cout << "deletions: " << stats.deletions << "\n";
    std::cout << "restarts: " << stats.restarts << "\n";
    std::cout << "final clusters: " << prev.order.size() << "\n";
    std::cout << "final e_r: " << prev.e_r.size() << "\n";
  }
  return verify_failed ? kExitVerifyFail : kExitOk;
}

int cmd_gen(const std::string& name, int n, int d, int cross, uint64_t seed,
            const std::string& out_path) {
  DiGraph g = generate(name, n, d, cross, seed);
  if (out_path.empty()) {
    write_edge_list(std::cout, g);
  } else {
    std::ostringstream ss;
    write_edge_list(ss, g);
    write_file(out_path, ss.str());
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"directed expander decompositions under edge deletions"};
  app.set_help_flag("--help", "print help");  // frees -h/--h for the level cap
  app.require_subcommand(1);

  std::string input = "-", out_path, dot_path, deletions_path, decomp_path;
  std::string phi_s = "1/10", psi_s = "1/2", oracle = "auto", log_s = "info";
  uint64_t seed = 0;
  int threads = 1;
  int64_t h_override = 0;
  bool verify = false;

  app.add_option("--log", log_s, "log level: silent|info|debug");

  auto* dec = app.add_subcommand("decompose", "compute a static expander decomposition");
  dec->add_option("-i,--input", input, "edge-list file ('-' for stdin)");
  dec->add_option("--phi", phi_s, "expansion parameter as a rational p/q");
  dec->add_option("--psi", psi_s, "witness parameter override (rational)");
  dec->add_option("--seed", seed, "oracle seed");
  dec->add_option("--oracle", oracle, "auto|brute|cutmatching");
  dec->add_option("--h", h_override, "level cap override for pruning engines");
  dec->add_option("--threads", threads, "parallel recursion width");
  dec->add_flag("--verify", verify, "verify the result before exiting");
  dec->add_option("--out", out_path, "write decomposition JSON here");
  dec->add_option("--dot", dot_path, "write the contracted DAG as DOT");

  auto* pr = app.add_subcommand("prune", "maintain a decomposition under deletions");
  pr->add_option("-i,--input", input, "edge-list file ('-' for stdin)");
  pr->add_option("--deletions", deletions_path, "deletion stream (one EdgeId per line)")
      ->required();
  pr->add_option("--phi", phi_s, "expansion parameter as a rational p/q");
  pr->add_option("--seed", seed, "oracle seed");
  pr->add_option("--oracle", oracle, "auto|brute|cutmatching");
  pr->add_option("--threads", threads, "parallel recursion width");
  pr->add_flag("--verify", verify, "verify refinement and quality inline");
  pr->add_option("--out", out_path, "write snapshot stream (JSONL) here");

  auto* ver = app.add_subcommand("verify", "check a decomposition JSON against a graph");
  ver->add_option("-i,--input", input, "edge-list file ('-' for stdin)");
  ver->add_option("--decomposition", decomp_path, "decomposition JSON")->required();

  auto* gen = app.add_subcommand("gen", "write a generated test graph");
  std::string gname;
  int gn = 8, gd = 4, gcross = 2;
  gen->add_option("name", gname,
                  "bidirected-clique|random-dregular|two-communities|directed-cycle|dag-path")
      ->required();
  gen->add_option("-n", gn, "vertex count (per community for two-communities)");
  gen->add_option("-d", gd, "degree");
  gen->add_option("--cross", gcross, "cross edges for two-communities");
  gen->add_option("--seed", seed, "generator seed");
  gen->add_option("--out", out_path, "output file (stdout otherwise)");

  CLI11_PARSE(app, argc, argv);

  if (const char* env = std::getenv("EXDIR_LOG")) log_s = env;
  if (log_s == "silent" || log_s == "0")
    g_log = 0;
  else if (log_s == "debug" || log_s == "2")
    g_log = 2;
  else
    g_log = 1;

  try {
    if (app.got_subcommand(dec))
      return cmd_decompose(input, phi_s, seed, oracle, h_override, threads, verify, out_path,
                           dot_path);
    if (app.got_subcommand(pr))
      return cmd_prune(input, deletions_path, phi_s, seed, oracle, threads, verify, out_path);
    if (app.got_subcommand(ver)) return cmd_verify(input, decomp_path);
    if (app.got_subcommand(gen)) return cmd_gen(gname, gn, gd, gcross, seed, out_path);
  } catch (const BudgetExceeded& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitBudget;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
