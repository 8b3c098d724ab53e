#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rspr/approx.hpp"
#include "rspr/exact.hpp"
#include "rspr/generate.hpp"
#include "rspr/key_verify.hpp"
#include "rspr/newick.hpp"

using namespace rspr;
using json = nlohmann::ordered_json;

namespace {

enum Exit { kOk = 0, kUsage = 1, kParse = 2, kBudget = 3, kInvariant = 4 };

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct Global {
  bool json = false;
  bool no_dummy = false;
  int threads = 1;
};

// The input pair and, when the dummy is on, its augmented copy. Cuts are
// reported over `work.F`, whose first vertices are those of the input F.
struct Input {
  TFPair work;
  int leaves = 0;
};

Input read_pair(const std::string& t_path, const std::string& f_path, bool dummy) {
  auto names = std::make_shared<LabelNames>();
  std::vector<std::string> warnings;
  Forest T, F;
  try {
    T = parse_tree(read_file(t_path), *names, &warnings);
  } catch (const ParseError& e) {
    throw InputError(t_path + ": " + e.what());
  }
  try {
    F = parse_forest(read_file(f_path), *names, &warnings);
  } catch (const ParseError& e) {
    throw InputError(f_path + ": " + e.what());
  }
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  if (T.labels() != F.labels()) throw InputError("T and F have different leaf label sets");
  Input in;
  in.leaves = static_cast<int>(T.labels().size());
  TFPair P = make_pair(std::move(T), std::move(F), names);
  in.work = dummy ? add_dummy(P) : rebase(P);
  in.work.names = names;
  return in;
}

// Leaf names below each cut edge, sorted; the dummy edge stands for the edge
// above the old root it hangs next to.
std::vector<std::vector<std::string>> describe_cut(const TFPair& D, const EdgeSet& cut) {
  std::vector<std::vector<std::string>> out;
  for (VertexId h : cut) {
    VertexId v = h;
    if (D.dummy != kNoLabel && D.F.label(h) == D.dummy) v = D.F.sibling(h);
    std::vector<std::string> names;
    LabelSet L = leaf_set(D.F, v, static_cast<std::size_t>(D.next_label));
    for (std::size_t l = L.find_first(); l != LabelSet::npos; l = L.find_next(l)) {
      auto id = static_cast<LabelId>(l);
      if (id != D.dummy) names.push_back(D.label_name(id));
    }
    std::sort(names.begin(), names.end());
    out.push_back(std::move(names));
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> agreement_forest(const TFPair& D, const EdgeSet& cut) {
  LabelSet drop(static_cast<std::size_t>(D.next_label));
  if (D.dummy != kNoLabel) drop.set(static_cast<std::size_t>(D.dummy));
  ReduceSpec s;
  s.cut = &cut;
  s.drop = &drop;
  Forest R = reduce(D.F, s).forest;
  std::string text = serialize(R, [&](LabelId l) { return D.label_name(l); });
  std::vector<std::string> lines;
  std::istringstream is(text);
  for (std::string line; std::getline(is, line);) {
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

struct Solution {
  std::optional<int> distance;
  EdgeSet cut;
  int lower_bound = 0;
  double seconds = 0;
};

Solution solve(const TFPair& D, const std::string& method, std::optional<int> budget) {
  Solution s;
  auto t0 = Clock::now();
  TFPair P = preprocess(D, false);
  if (method == "exact") {
    ExactOptions o;
    o.budget = budget;
    if (!P.is_empty()) {
      auto r = exact_distance(P, o);
      if (!r) throw BudgetExceeded("distance exceeds the budget of " + std::to_string(*budget));
      s.cut = r->cut;
    }
    s.distance = static_cast<int>(s.cut.size());
    s.lower_bound = *s.distance;
  } else if (method == "approx2") {
    s.cut = P.is_empty() ? EdgeSet{} : approx2(P).cut;
    s.lower_bound = (static_cast<int>(s.cut.size()) + 1) / 2;
  } else {
    s.cut = P.is_empty() ? EdgeSet{} : approx3(P);
    s.lower_bound = (static_cast<int>(s.cut.size()) + 2) / 3;
  }
  s.seconds = seconds_since(t0);
  return s;
}

std::string braces(const std::vector<std::vector<std::string>>& cut) {
  std::string out;
  for (const auto& part : cut) {
    if (!out.empty()) out += " ";
    out += "{";
    for (std::size_t i = 0; i < part.size(); ++i) out += (i ? " " : "") + part[i];
    out += "}";
  }
  return out;
}

int run_dist(const Global& g, const std::string& t, const std::string& f, const std::string& method,
             std::optional<int> budget, bool forest_only) {
  if (budget && method != "exact") throw UsageError("--budget applies to the exact method only");
  if (budget && *budget < 0) throw UsageError("--budget must be non-negative");
  Input in = read_pair(t, f, !g.no_dummy);
  Solution s = solve(in.work, method, budget);
  auto cut = describe_cut(in.work, s.cut);
  auto forest = agreement_forest(in.work, s.cut);
  if (g.json) {
    json j;
    j["command"] = forest_only ? "maf" : "dist";
    j["method"] = method;
    j["dummy"] = !g.no_dummy;
    j["leaves"] = in.leaves;
    if (!forest_only) {
      j["distance"] = s.distance ? json(*s.distance) : json(nullptr);
      j["lower_bound"] = s.lower_bound;
      j["cut_size"] = s.cut.size();
      j["cut"] = cut;
    }
    j["forest"] = forest;
    j["seconds"] = s.seconds;
    std::cout << j.dump(2) << "\n";
    return kOk;
  }
  if (!forest_only) {
    std::cout << "method: " << method << "\n";
    if (s.distance) {
      std::cout << "distance: " << *s.distance << "\n";
    } else {
      std::cout << "distance: between " << s.lower_bound << " and " << s.cut.size() << "\n";
    }
    std::cout << "cut_size: " << s.cut.size() << "\n";
    std::cout << "cut: " << braces(cut) << "\n";
    std::cout << "forest:\n";
  }
  for (const auto& line : forest) std::cout << line << "\n";
  return kOk;
}

std::uint64_t default_seed() {
  const char* env = std::getenv("RSPR_SEED");
  if (!env || !*env) return 1;
  try {
    std::size_t used = 0;
    std::uint64_t v = std::stoull(env, &used);
    if (used != std::strlen(env)) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw UsageError(std::string("RSPR_SEED is not an unsigned integer: ") + env);
  }
}

int run_gen(const Global& g, int leaves, int moves, std::uint64_t seed, const std::string& shape,
            const std::string& out) {
  GenSpec spec;
  spec.n_leaves = leaves;
  spec.n_moves = moves;
  spec.seed = seed;
  spec.shape = parse_shape(shape);
  TFPair P = gen_pair(spec);
  std::filesystem::create_directories(out);
  std::string tp = (std::filesystem::path(out) / "T.nwk").string();
  std::string fp = (std::filesystem::path(out) / "F.nwk").string();
  std::ofstream(tp) << serialize(P.T, *P.names);
  std::ofstream(fp) << serialize(P.F, *P.names);
  if (g.json) {
    json j;
    j["command"] = "gen";
    j["leaves"] = leaves;
    j["moves"] = moves;
    j["seed"] = seed;
    j["shape"] = shape;
    j["T"] = tp;
    j["F"] = fp;
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << tp << "\n" << fp << "\n";
  }
  return kOk;
}

struct RunRecord {
  int instance = 0;
  int n_leaves = 0;
  int n_moves = 0;
  std::string shape;
  std::uint64_t seed = 0;
  std::optional<int> exact;
  int approx2 = 0;
  int approx3 = 0;
  std::vector<int> stages;
  double t_exact = 0, t_approx2 = 0, t_approx3 = 0;
};

const char* const kCsvHeader =
    "instance,n_leaves,n_moves,shape,seed,exact_d,approx2,approx3,ratio2,ratio3,stage_sizes,t_exact,t_approx2,"
    "t_approx3";

std::string ratio(int a, const std::optional<int>& d) {
  if (!d || *d == 0) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", static_cast<double>(a) / *d);
  return buf;
}

std::string csv_row(const RunRecord& r) {
  std::string stages;
  for (std::size_t i = 0; i < r.stages.size(); ++i) stages += (i ? ";" : "") + std::to_string(r.stages[i]);
  char times[96];
  std::snprintf(times, sizeof times, "%.6f,%.6f,%.6f", r.t_exact, r.t_approx2, r.t_approx3);
  std::ostringstream s;
  s << r.instance << "," << r.n_leaves << "," << r.n_moves << "," << r.shape << "," << r.seed << ","
    << (r.exact ? std::to_string(*r.exact) : "") << "," << r.approx2 << "," << r.approx3 << "," << ratio(r.approx2, r.exact)
    << "," << ratio(r.approx3, r.exact) << "," << stages << "," << times;
  return s.str();
}

RunRecord bench_one(int instance, int n, int moves, std::uint64_t seed, const std::string& shape, bool dummy,
                    int exact_max) {
  RunRecord r;
  r.instance = instance;
  r.n_leaves = n;
  r.n_moves = moves;
  r.shape = shape;
  r.seed = seed;
  GenSpec spec;
  spec.n_leaves = n;
  spec.n_moves = moves;
  spec.seed = seed;
  spec.shape = parse_shape(shape);
  TFPair P = preprocess(gen_pair(spec), dummy);
  auto t0 = Clock::now();
  ApproxResult a2 = P.is_empty() ? ApproxResult{} : approx2(P, false);
  r.t_approx2 = seconds_since(t0);
  r.approx2 = static_cast<int>(a2.cut.size());
  t0 = Clock::now();
  r.approx3 = P.is_empty() ? 0 : static_cast<int>(approx3(P).size());
  r.t_approx3 = seconds_since(t0);
  if (!P.is_empty()) {
    ApproxResult staged = approx2(P, true);
    for (const auto& s : staged.stages) r.stages.push_back(static_cast<int>(s.cut.size()));
  }
  if (n <= exact_max) {
    t0 = Clock::now();
    r.exact = P.is_empty() ? 0 : exact_distance(P)->distance;
    r.t_exact = seconds_since(t0);
  }
  return r;
}

json record_json(const RunRecord& r) {
  json j;
  j["instance"] = r.instance;
  j["n_leaves"] = r.n_leaves;
  j["n_moves"] = r.n_moves;
  j["shape"] = r.shape;
  j["seed"] = r.seed;
  j["exact_d"] = r.exact ? json(*r.exact) : json(nullptr);
  j["approx2"] = r.approx2;
  j["approx3"] = r.approx3;
  j["ratio2"] = r.exact && *r.exact ? json(static_cast<double>(r.approx2) / *r.exact) : json(nullptr);
  j["ratio3"] = r.exact && *r.exact ? json(static_cast<double>(r.approx3) / *r.exact) : json(nullptr);
  j["stage_sizes"] = r.stages;
  j["t_exact"] = r.t_exact;
  j["t_approx2"] = r.t_approx2;
  j["t_approx3"] = r.t_approx3;
  return j;
}

int run_bench(const Global& g, const std::vector<int>& sizes, int moves, int trials, std::uint64_t seed,
              const std::string& shape, const std::string& csv, int exact_max) {
  parse_shape(shape);
  for (int n : sizes) {
    if (n < 2) throw UsageError("--leaves values must be at least 2");
  }
  struct Job {
    int instance, n;
  };
  std::vector<Job> jobs;
  for (int n : sizes) {
    for (int t = 0; t < trials; ++t) jobs.push_back({static_cast<int>(jobs.size()), n});
  }
  std::vector<RunRecord> records(jobs.size());
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        records[i] = bench_one(jobs[i].instance, jobs[i].n, moves, seed + static_cast<std::uint64_t>(jobs[i].instance),
                               shape, !g.no_dummy, exact_max);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int i = 1; i < g.threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  std::sort(records.begin(), records.end(), [](const RunRecord& a, const RunRecord& b) { return a.instance < b.instance; });
  std::ostringstream rows;
  rows << kCsvHeader << "\n";
  for (const auto& r : records) rows << csv_row(r) << "\n";
  if (!csv.empty()) {
    std::ofstream out(csv);
    if (!out) throw InputError("cannot write " + csv);
    out << rows.str();
  }
  if (g.json) {
    json j;
    j["command"] = "bench";
    j["records"] = json::array();
    for (const auto& r : records) j["records"].push_back(record_json(r));
    std::cout << j.dump(2) << "\n";
  } else if (csv.empty()) {
    std::cout << rows.str();
  }
  for (const auto& r : records) {
    if (!r.exact) continue;
    if (r.approx2 > 2 * *r.exact || r.approx3 > 3 * *r.exact) {
      throw InvariantError("instance " + std::to_string(r.instance) + " exceeds its approximation ratio");
    }
  }
  return kOk;
}

int oracle(const TFPair& P) {
  if (P.is_empty()) return 0;
  ExactOptions o;
  o.bound = LowerBound::Approx3;
  o.seed_incumbent = false;
  return exact_distance(P, o)->distance;
}

int run_verify(const Global& g, const std::string& t, const std::string& f, bool stagewise, int max_leaves) {
  Input in = read_pair(t, f, !g.no_dummy);
  if (in.leaves > max_leaves) {
    throw UsageError("verify runs exact searches; the pair has " + std::to_string(in.leaves) + " leaves, over --max-leaves " +
                     std::to_string(max_leaves));
  }
  TFPair P = preprocess(in.work, false);
  int d = oracle(P);
  ApproxResult res = P.is_empty() ? ApproxResult{} : approx2(P, true);
  bool agreement = is_agreement_cut(in.work, res.cut);
  bool ratio_ok = static_cast<int>(res.cut.size()) <= 2 * d;
  bool passed = agreement && ratio_ok;
  json stages = json::array();
  for (std::size_t i = 0; i < res.stages.size(); ++i) {
    const StageRecord& s = res.stages[i];
    int before = oracle(s.before);
    int after = oracle(preprocess(induced_subpair(s.before, s.cut), false));
    bool good = 2 * (before - after) >= static_cast<int>(s.cut.size());
    std::string key = "none";
    GoodCutResult gc = find_good_cut(s.before);
    if (gc.key) {
      const LabelSet* scope = gc.scope.any() && gc.scope != gc.key->X ? &gc.scope : nullptr;
      LabelSet y = scope ? *scope : gc.key->X;
      if (static_cast<int>(y.count()) > kKeyLeafLimit) {
        key = "skipped";
      } else {
        bool ok = validate_key(s.before, *gc.key, scope) && certify(s.before, *gc.key, Grade::Good, scope);
        key = ok ? "certified" : "failed";
      }
    }
    passed = passed && good && key != "failed";
    json js;
    js["index"] = i + 1;
    js["step"] = s.step;
    js["construction"] = s.construction;
    js["cut_size"] = s.cut.size();
    js["d_before"] = before;
    js["d_after"] = after;
    js["good"] = good;
    js["key"] = key;
    stages.push_back(js);
  }
  if (g.json) {
    json j;
    j["command"] = "verify";
    j["dummy"] = !g.no_dummy;
    j["leaves"] = in.leaves;
    j["distance"] = d;
    j["cut_size"] = res.cut.size();
    j["agreement"] = agreement;
    j["ratio_ok"] = ratio_ok;
    j["stages"] = stages;
    j["passed"] = passed;
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "distance: " << d << "\n";
    std::cout << "approx2_cut_size: " << res.cut.size() << "\n";
    std::cout << "agreement: " << (agreement ? "yes" : "no") << "\n";
    std::cout << "within_2d: " << (ratio_ok ? "yes" : "no") << "\n";
    if (stagewise) {
      for (const auto& s : stages) {
        std::cout << "stage " << s["index"].get<int>() << ": step " << s["step"].get<int>() << " "
                  << s["construction"].get<std::string>() << " |C|=" << s["cut_size"].get<int>() << " d "
                  << s["d_before"].get<int>() << " -> " << s["d_after"].get<int>() << " "
                  << (s["good"].get<bool>() ? "good" : "short") << ", key " << s["key"].get<std::string>() << "\n";
      }
    }
    std::cout << "stages: " << stages.size() << "\n";
    std::cout << "certificates: " << (passed ? "pass" : "fail") << "\n";
  }
  return passed ? kOk : kInvariant;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rSPR distance between rooted binary phylogenetic trees"};
  app.require_subcommand(1);
  app.fallthrough();
  Global g;
  app.add_flag("--json", g.json, "Print machine-readable JSON");
  app.add_flag("--no-dummy", g.no_dummy, "Do not add the shared dummy leaf above both roots");
  app.add_option("--threads", g.threads, "Worker threads for bench")->check(CLI::Range(1, 1 << 20));

  std::string t_path, f_path, method = "exact";
  std::optional<int> budget;
  auto* dist = app.add_subcommand("dist", "Distance, witness cut and agreement forest");
  dist->add_option("T", t_path, "Newick file with the tree T")->required();
  dist->add_option("F", f_path, "Newick file with the tree or forest F")->required();
  auto* m_exact = dist->add_flag_callback("--exact", [&] { method = "exact"; }, "Exact branch and bound (default)");
  auto* m_a2 = dist->add_flag_callback("--approx2", [&] { method = "approx2"; }, "2-approximation");
  auto* m_a3 = dist->add_flag_callback("--approx3", [&] { method = "approx3"; }, "3-approximation");
  m_exact->excludes(m_a2)->excludes(m_a3);
  m_a2->excludes(m_a3);
  dist->add_option("--budget", budget, "Give up when the distance exceeds K (exact only)");

  std::string maf_method = "exact";
  auto* maf = app.add_subcommand("maf", "Agreement forest only");
  maf->add_option("T", t_path, "Newick file with the tree T")->required();
  maf->add_option("F", f_path, "Newick file with the tree or forest F")->required();
  maf->add_option("--method", maf_method, "exact, approx2 or approx3")
      ->check(CLI::IsMember({"exact", "approx2", "approx3"}));

  int leaves = 0, moves = 1, trials = 10, exact_max = 24, max_leaves = 30;
  std::optional<std::uint64_t> seed;
  std::string shape = "yule", out_dir, csv;
  auto* gen = app.add_subcommand("gen", "Write a random pair T.nwk, F.nwk");
  gen->add_option("--leaves", leaves, "Number of leaves")->required()->check(CLI::Range(2, 1 << 24));
  gen->add_option("--moves", moves, "Random rSPR moves applied to T to get F")->check(CLI::Range(0, 1 << 20));
  gen->add_option("--seed", seed, "Seed (default RSPR_SEED or 1)");
  gen->add_option("--shape", shape, "yule or uniform")->check(CLI::IsMember({"yule", "uniform"}));
  gen->add_option("--out", out_dir, "Output directory")->required();

  std::vector<int> sizes;
  int bench_moves = 5;
  auto* bench = app.add_subcommand("bench", "Run random trials and write one CSV row per trial");
  bench->add_option("--leaves", sizes, "Comma-separated leaf counts")->required()->delimiter(',');
  bench->add_option("--moves", bench_moves, "Moves per instance")->check(CLI::Range(0, 1 << 20));
  bench->add_option("--trials", trials, "Trials per leaf count")->check(CLI::Range(1, 1 << 20));
  bench->add_option("--seed", seed, "Base seed (default RSPR_SEED or 1); instance i uses seed + i");
  bench->add_option("--shape", shape, "yule or uniform")->check(CLI::IsMember({"yule", "uniform"}));
  bench->add_option("--csv", csv, "CSV output file (stdout when absent and --json is not given)");
  bench->add_option("--exact-max-leaves", exact_max, "Run the exact solver only up to this many leaves")
      ->check(CLI::Range(0, 1 << 20));

  bool stagewise = false;
  auto* verify = app.add_subcommand("verify", "Cross-check approx2 stage by stage against exact search");
  verify->add_option("T", t_path, "Newick file with the tree T")->required();
  verify->add_option("F", f_path, "Newick file with the tree or forest F")->required();
  verify->add_flag("--stagewise", stagewise, "Print one line per stage");
  verify->add_option("--max-leaves", max_leaves, "Refuse larger pairs")->check(CLI::Range(1, 1 << 20));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*dist) return run_dist(g, t_path, f_path, method, budget, false);
    if (*maf) return run_dist(g, t_path, f_path, maf_method, std::nullopt, true);
    if (*gen) return run_gen(g, leaves, moves, seed ? *seed : default_seed(), shape, out_dir);
    if (*bench) return run_bench(g, sizes, bench_moves, trials, seed ? *seed : default_seed(), shape, csv, exact_max);
    if (*verify) return run_verify(g, t_path, f_path, stagewise, max_leaves);
  } catch (const BudgetExceeded& e) {
    std::cerr << "budget exceeded: " << e.what() << "\n";
    return kBudget;
  } catch (const ResourceError& e) {
    std::cerr << "resource limit: " << e.what() << "\n";
    return kBudget;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kParse;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kParse;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInvariant;
  }
  return kUsage;
}
