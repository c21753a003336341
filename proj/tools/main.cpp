// walkopt: target-set selection for random walks and MDPs.
//
// Subcommands: gen, hit, cover, reach, acpc, joint, experiment.
// Exit codes: 0 success, 2 configuration/input error, 3 algorithm failure.

#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "walkopt/experiments.hpp"
#include "walkopt/joint.hpp"
#include "walkopt/reachability.hpp"

namespace {

using namespace walkopt;

NodeSet parse_set(const std::string& csv) {
  if (csv.empty()) return {};
  std::vector<Node> members;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) members.push_back(std::stoi(tok));
  return NodeSet(members);
}

int run(int argc, char** argv) {
  CLI::App app{"Target-set selection for random walks and MDPs"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a graph or MDP");
  std::string gen_type = "er", gen_out;
  int gen_n = 10, gen_rows = 5, gen_cols = 5;
  double gen_p = 0.3, gen_pc = 0.7;
  std::uint64_t gen_seed = 1;
  gen->add_option("--type", gen_type,
                  "er | random-mdp | lattice-mdp")->capture_default_str();
  gen->add_option("--n", gen_n)->capture_default_str();
  gen->add_option("--rows", gen_rows)->capture_default_str();
  gen->add_option("--cols", gen_cols)->capture_default_str();
  gen->add_option("--p", gen_p)->capture_default_str();
  gen->add_option("--p-c", gen_pc)->capture_default_str();
  gen->add_option("--seed", gen_seed)->capture_default_str();
  gen->add_option("--out", gen_out, "Output file")->required();

  // hit
  auto* hit = app.add_subcommand("hit", "Exact expected hitting time");
  std::string hit_graph, hit_set;
  int hit_start = -1;
  hit->add_option("--graph", hit_graph, "Graph CSV")->required();
  hit->add_option("--set", hit_set, "Target set, e.g. 1,4,5")->required();
  hit->add_option("--start", hit_start,
                  "Start node (omit for the uniform distribution)");

  // cover
  auto* cover = app.add_subcommand("cover", "Cover time (MC or exact)");
  std::string cover_graph, cover_set;
  int cover_start = 0;
  long cover_samples = 1000, cover_cap = 1000000;
  std::uint64_t cover_seed = 1;
  bool cover_exact = false;
  cover->add_option("--graph", cover_graph)->required();
  cover->add_option("--set", cover_set)->required();
  cover->add_option("--start", cover_start)->capture_default_str();
  cover->add_option("--samples", cover_samples)->capture_default_str();
  cover->add_option("--cap", cover_cap)->capture_default_str();
  cover->add_option("--seed", cover_seed)->capture_default_str();
  cover->add_flag("--exact", cover_exact, "Exact product-chain solve");

  // reach
  auto* reach = app.add_subcommand("reach", "Select states maximizing reachability");
  std::string reach_mdp, reach_unsafe;
  int reach_budget = 1;
  double reach_delta = 1e-3, reach_epsilon = 1e-6;
  reach->add_option("--mdp", reach_mdp, "MDP JSON")->required();
  reach->add_option("--unsafe", reach_unsafe, "Unsafe set override");
  reach->add_option("--budget", reach_budget)->capture_default_str();
  reach->add_option("--delta", reach_delta, "Step size")->capture_default_str();
  reach->add_option("--epsilon", reach_epsilon)->capture_default_str();

  // acpc
  auto* acpc = app.add_subcommand("acpc", "Select states minimizing ACPC");
  std::string acpc_mdp;
  int acpc_budget = 1;
  double acpc_delta = 0.05, acpc_zeta = 0.0;
  long acpc_samples = 2000;
  std::uint64_t acpc_seed = 1;
  acpc->add_option("--mdp", acpc_mdp)->required();
  acpc->add_option("--budget", acpc_budget)->capture_default_str();
  acpc->add_option("--delta", acpc_delta)->capture_default_str();
  acpc->add_option("--zeta", acpc_zeta, "Box bound (0 = 10n)")->capture_default_str();
  acpc->add_option("--samples", acpc_samples)->capture_default_str();
  acpc->add_option("--seed", acpc_seed)->capture_default_str();

  // joint
  auto* joint = app.add_subcommand("joint",
                                   "Jointly optimize ACPC and reachability");
  std::string joint_mdp, joint_unsafe;
  int joint_budget = 2;
  double joint_delta = 0.05;
  long joint_samples = 2000;
  std::uint64_t joint_seed = 1;
  joint->add_option("--mdp", joint_mdp)->required();
  joint->add_option("--unsafe", joint_unsafe);
  joint->add_option("--budget", joint_budget)->capture_default_str();
  joint->add_option("--delta", joint_delta)->capture_default_str();
  joint->add_option("--samples", joint_samples)->capture_default_str();
  joint->add_option("--seed", joint_seed)->capture_default_str();

  // experiment
  auto* exp = app.add_subcommand("experiment", "Run a configured experiment");
  std::string exp_config, exp_out;
  exp->add_option("--config", exp_config, "JSON config")->required();
  exp->add_option("--out", exp_out, "CSV output override");

  CLI11_PARSE(app, argc, argv);

  if (*gen) {
    if (gen_type == "er") {
      save_graph_csv(gen_erdos_renyi(gen_n, gen_p, gen_seed), gen_out);
    } else if (gen_type == "random-mdp") {
      save_mdp_json(gen_random_mdp(gen_n, gen_seed), gen_out);
    } else if (gen_type == "lattice-mdp") {
      save_mdp_json(gen_lattice_mdp(gen_rows, gen_cols, gen_pc), gen_out);
    } else {
      throw ValidationError("unknown gen type: " + gen_type);
    }
    std::cout << "wrote " << gen_out << "\n";
  } else if (*hit) {
    const StochasticGraph g = load_graph_csv(hit_graph);
    const Distribution start = hit_start >= 0
                                   ? Distribution::point(g.n(), hit_start)
                                   : Distribution::uniform(g.n());
    std::cout << hitting_time_exact(g, parse_set(hit_set), start) << "\n";
  } else if (*cover) {
    const StochasticGraph g = load_graph_csv(cover_graph);
    const NodeSet S = parse_set(cover_set);
    if (cover_exact) {
      std::cout << cover_time_exact_small(g, cover_start, S) << "\n";
    } else {
      const TimeEstimate est =
          cover_time_mc(g, cover_start, S, cover_samples, cover_cap, cover_seed);
      std::cout << est.mean << " +- " << est.half_width << " (" << est.samples
                << " samples, " << est.cap_hits << " capped)\n";
    }
  } else if (*reach) {
    Mdp m = load_mdp_json(reach_mdp);
    if (!reach_unsafe.empty()) m = m.with_unsafe(parse_set(reach_unsafe));
    PenaltyConfig cfg;
    cfg.delta = reach_delta;
    cfg.epsilon = reach_epsilon;
    const ReachSelection sel =
        select_states_reachability(m, m.unsafe(), reach_budget, cfg);
    std::cout << "chosen " << sel.chosen.to_string() << "\nachieved "
              << sel.achieved << "\nupper-bound " << sel.upper_bound
              << "\nconverged " << (sel.converged ? "yes" : "no") << "\n";
  } else if (*acpc) {
    const Mdp m = load_mdp_json(acpc_mdp);
    AcpcSelectConfig cfg;
    cfg.n_samples = acpc_samples;
    cfg.seed = acpc_seed;
    const AcpcSelection sel =
        min_acpc_select(m, acpc_budget, acpc_delta, acpc_zeta, cfg);
    std::cout << "chosen " << sel.chosen.to_string() << "\nlambda-hat "
              << sel.lambda_hat << "\ncertificate " << sel.certificate << "\n";
  } else if (*joint) {
    Mdp m = load_mdp_json(joint_mdp);
    if (!joint_unsafe.empty()) m = m.with_unsafe(parse_set(joint_unsafe));
    const JointInstance inst =
        JointInstance::build(m, m.unsafe(), joint_budget);
    AcpcSelectConfig cfg;
    cfg.n_samples = joint_samples;
    cfg.seed = joint_seed;
    const AcpcSelection sel = min_acpc_max_reach(inst, joint_delta, cfg);
    std::cout << "chosen " << sel.chosen.to_string() << "\nlambda-hat "
              << sel.lambda_hat << "\ncertificate " << sel.certificate
              << "\namecs " << inst.amecs.size() << "\n";
  } else if (*exp) {
    ExperimentConfig cfg = load_experiment_config(exp_config);
    if (!exp_out.empty()) cfg.out = exp_out;
    if (cfg.out.empty())
      throw ValidationError("experiment: no output path (config .out or --out)");
    write_csv(run_experiment(cfg), cfg.out);
    std::cout << "wrote " << cfg.out << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const walkopt::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const walkopt::AlgorithmError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
