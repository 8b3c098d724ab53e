#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "key_bounds.hpp"

using namespace rspr;
using namespace rspr::testing;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failed = 0;
std::map<int, std::string> lines;

void report(int id, const std::string& name, bool ok, const std::string& detail) {
  lines[id] = std::string(ok ? "PASS" : "FAIL") + " " + std::to_string(id) + " " + name + ": " + detail;
  if (!ok) ++failed;
}

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

// Rooted binary trees as child arrays; leaves carry labels 0..n-1.
struct Topology {
  std::vector<int> left, right, label;
  int root = 0;
};

// Children sorted by their printed form, so equal trees print equally.
std::string canonical(const Topology& s, const std::vector<int>& perm) {
  std::function<std::string(int)> rec = [&](int v) -> std::string {
    if (s.label[v] >= 0) return "x" + std::to_string(perm[s.label[v]] + 1);
    std::string a = rec(s.left[v]), b = rec(s.right[v]);
    if (b < a) std::swap(a, b);
    return "(" + a + "," + b + ")";
  };
  return rec(s.root);
}

std::string unlabeled(const Topology& s, int v) {
  if (s.label[v] >= 0) return "*";
  std::string a = unlabeled(s, s.left[v]), b = unlabeled(s, s.right[v]);
  if (b < a) std::swap(a, b);
  return "(" + a + "," + b + ")";
}

// Every labeled rooted binary tree on n leaves, by inserting leaf k above
// each vertex of every tree on k-1 leaves.
std::vector<Topology> all_trees(int n) {
  Topology one;
  one.left = {-1};
  one.right = {-1};
  one.label = {0};
  std::vector<Topology> cur{one};
  for (int k = 1; k < n; ++k) {
    std::vector<Topology> next;
    for (const Topology& s : cur) {
      int m = static_cast<int>(s.label.size());
      for (int u = 0; u < m; ++u) {
        Topology t = s;
        int leaf = m, w = m + 1;
        t.left.push_back(-1);
        t.right.push_back(-1);
        t.label.push_back(k);
        t.left.push_back(u);
        t.right.push_back(leaf);
        t.label.push_back(-1);
        if (u == s.root) {
          t.root = w;
        } else {
          for (int p = 0; p < m; ++p) {
            if (t.left[p] == u) t.left[p] = w;
            if (t.right[p] == u) t.right[p] = w;
          }
        }
        next.push_back(std::move(t));
      }
    }
    cur = std::move(next);
  }
  return cur;
}

// Pairs (T, F) on n leaves up to relabeling: T runs over the unlabeled
// shapes and F over all labeled trees, deduplicated under T's automorphisms.
std::vector<std::pair<std::string, std::string>> exhaustive_family(int n) {
  std::vector<Topology> trees = all_trees(n);
  std::vector<int> id(n);
  std::iota(id.begin(), id.end(), 0);
  std::map<std::string, const Topology*> shapes;
  for (const Topology& s : trees) shapes.emplace(unlabeled(s, s.root), &s);
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [shape, T] : shapes) {
    std::string ts = canonical(*T, id);
    std::vector<std::vector<int>> autos;
    std::vector<int> perm = id;
    do {
      if (canonical(*T, perm) == ts) autos.push_back(perm);
    } while (std::next_permutation(perm.begin(), perm.end()));
    std::set<std::string> seen;
    for (const Topology& F : trees) {
      std::string best;
      for (const auto& a : autos) {
        std::string c = canonical(F, a);
        if (best.empty() || c < best) best = c;
      }
      if (seen.insert(best).second) out.emplace_back(ts + ";", best + ";");
    }
  }
  return out;
}

bool exact_matches_brute(const TFPair& P) {
  if (P.is_empty()) return true;
  auto b = brute_force_distance(P, 8);
  auto e = exact_distance(P);
  return b && e && b->distance == e->distance;
}

void criterion_oracle() {
  auto t0 = Clock::now();
  int pairs = 0, bad = 0;
  for (int n = 2; n <= 6; ++n) {
    for (const auto& [t, f] : exhaustive_family(n)) {
      ++pairs;
      if (!exact_matches_brute(preprocess(fixtures::pair_from(t, f), true))) ++bad;
    }
  }
  int exhaustive = pairs;
  for (int t = 0; t < 500; ++t) {
    ++pairs;
    TFPair P = random_pair(4 + t % 7, 1 + t % 5, 10000 + t, t % 2 ? Shape::Uniform : Shape::Yule);
    if (!exact_matches_brute(P)) ++bad;
  }
  double s = seconds_since(t0);
  report(1, "exact equals brute force", bad == 0 && s < 600,
         std::to_string(exhaustive) + " exhaustive + 500 random pairs, " + std::to_string(bad) + " mismatches, " +
             fmt("%.1f s", s));
}

void criteria_ratios() {
  int bad2 = 0, bad3 = 0, counted = 0;
  double sum2 = 0, sum3 = 0;
  for (int t = 0; t < 500; ++t) {
    TFPair P = random_pair(4 + t % 11, 1 + t % 6, 20000 + t, t % 2 ? Shape::Uniform : Shape::Yule);
    if (P.is_empty()) continue;
    int d = oracle_distance(P);
    int a2 = static_cast<int>(approx2(P).cut.size());
    int a3 = static_cast<int>(approx3(P).size());
    if (a2 > 2 * d) ++bad2;
    if (a3 > 3 * d) ++bad3;
    if (d > 0) {
      ++counted;
      sum2 += static_cast<double>(a2) / d;
      sum3 += static_cast<double>(a3) / d;
    }
  }
  report(2, "approx2 within 2d", bad2 == 0,
         "500 pairs, " + std::to_string(bad2) + " over, mean ratio " + fmt("%.3f", counted ? sum2 / counted : 0));
  report(6, "approx3 within 3d", bad3 == 0,
         "500 pairs, " + std::to_string(bad3) + " over, mean ratio " + fmt("%.3f", counted ? sum3 / counted : 0));
}

void criterion_stages() {
  int stages = 0, bad = 0;
  std::string first;
  for (int t = 0; t < 200; ++t) {
    TFPair P = random_pair(4 + t % 9, 1 + t % 5, 30000 + t, t % 2 ? Shape::Uniform : Shape::Yule);
    for (const StageRecord& s : approx2(P, true).stages) {
      ++stages;
      int drop = distance_drop(s.before, s.cut);
      int need = (static_cast<int>(s.cut.size()) + 1) / 2;
      if (drop < need && bad++ == 0) first = " (first: pair " + std::to_string(t) + ", " + s.construction + ")";
    }
  }
  report(3, "every stage is a good cut", bad == 0,
         "200 pairs, " + std::to_string(stages) + " stages, " + std::to_string(bad) + " short" + first);
}

void criterion_key_bounds() {
  struct Suite {
    const char* name;
    std::function<void(SuiteResult&)> run;
  };
  std::vector<Suite> suites = {
      {"pendant pair (b >= 1, |k| <= 2)", [](SuiteResult& r) { pendant_pair_suite(r, 100, 40000); }},
      {"crossing cherries (|k| <= 2b)", [](SuiteResult& r) { crossing_cherries_suite(r, 100, 41000); }},
      {"b_X <= b_L(T)", [](SuiteResult& r) { bound_monotone_suite(r, 100, 42000); }},
      {"d - d' >= b", [](SuiteResult& r) { distance_drop_suite(r, 100, 43000); }},
      {"one more edge (f_e grows, f_c +1 at most)", [](SuiteResult& r) { one_more_edge_suite(r, 100, 44000); }},
  };
  bool ok = true;
  std::string detail;
  for (const Suite& s : suites) {
    SuiteResult r;
    s.run(r);
    ok = ok && r.passed(50);
    if (!detail.empty()) detail += "; ";
    detail += std::string(s.name) + " " + std::to_string(r.instances - r.failures) + "/" + std::to_string(r.instances);
    if (r.failures) detail += " [" + r.first_failure + "]";
  }
  report(4, "key bound properties", ok, detail);
}

void criterion_grades() {
  SuiteResult r;
  key_grade_suite(r, 400, 50000);
  std::string detail = std::to_string(r.instances) + " keys, " + std::to_string(r.failures) + " failed";
  if (r.failures) detail += " [" + r.first_failure + "]";
  report(5, "constructed keys certify at their grade", r.passed(50), detail);
}

void criterion_figure() {
  using namespace fixtures;
  ConfigFigure c = config_figure();
  const TFPair& P = c.P;
  EdgeSet expect{t_leaf(P, "x1"), t_leaf(P, "x2"), t_leaf(P, "x10"), c.lambda};
  bool forced = is_canonical_cut(P.F, c.dashed) && forced_cut(P, c.dashed) == expect;
  LabelSet X = labels(P, {"x2", "x3", "x4"});
  EdgeSet A{f_leaf(P, "x1")};
  int nv = n_paths(P.F, {}, X, c.v), nw = n_paths(P.F, {}, X, c.w);
  int nav = n_paths(P.F, A, X, c.v), naw = n_paths(P.F, A, X, c.w);
  bool counts = nv == 0 && nw == 1 && nav == 1 && naw == 2;
  Key k;
  k.X = X;
  k.B = {f_leaf(P, "x1"), f_leaf(P, "x2"), c.u};
  k.R = path_edges(P.F, f_leaf(P, "x3"), f_leaf(P, "x4"));
  KeyCheck v = validate_key(P, k);
  report(7, "configuration figure", forced && counts && v.ok,
         std::string("forced cut ") + (forced ? "matches" : "differs") + ", N_X(v)=" + std::to_string(nv) +
             " N_X(w)=" + std::to_string(nw) + " N_A,X(v)=" + std::to_string(nav) + " N_A,X(w)=" + std::to_string(naw) +
             ", key " + (v.ok ? "valid" : "invalid: " + v.reason));
}

void criterion_performance() {
  const std::vector<int> sizes{125, 250, 500, 1000};
  std::vector<double> times;
  for (int n : sizes) {
    std::vector<double> runs;
    for (int rep = 0; rep < 5; ++rep) {
      GenSpec g;
      g.n_leaves = n;
      g.n_moves = 50;
      g.seed = 60000 + rep;
      TFPair P = preprocess(gen_pair(g), true);
      auto t0 = Clock::now();
      ApproxResult r = approx2(P);
      runs.push_back(seconds_since(t0));
      if (r.cut.empty() && !P.is_empty()) runs.back() = 1e9;
    }
    std::sort(runs.begin(), runs.end());
    times.push_back(runs[runs.size() / 2]);
  }
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    mx += std::log(sizes[i]);
    my += std::log(times[i]);
  }
  mx /= sizes.size();
  my /= sizes.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    double dx = std::log(sizes[i]) - mx;
    sxy += dx * (std::log(times[i]) - my);
    sxx += dx * dx;
  }
  double slope = sxy / sxx;
  std::string detail;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    detail += "n=" + std::to_string(sizes[i]) + " " + fmt("%.4f s", times[i]) + ", ";
  }
  detail += "slope " + fmt("%.2f", slope);
  report(8, "approx2 runtime", times.back() < 60 && slope <= 3.3, detail);
}

void criterion_newick() {
  std::mt19937_64 rng(70000);
  int bad = 0;
  for (int t = 0; t < 1000; ++t) {
    LabelNames names;
    Forest F = random_tree(2 + t % 199, t % 2 ? Shape::Uniform : Shape::Yule, rng, names);
    std::string text = serialize(F, names);
    Forest G = parse_tree(text, names);
    if (!isomorphic(F, G) || serialize(G, names) != text) ++bad;
  }
  report(9, "Newick round trip", bad == 0, "1000 trees, " + std::to_string(bad) + " mismatches");
}

}  // namespace

int main() {
  criterion_oracle();
  criteria_ratios();
  criterion_stages();
  criterion_key_bounds();
  criterion_grades();
  criterion_figure();
  criterion_performance();
  criterion_newick();
  for (const auto& [id, line] : lines) std::printf("%s\n", line.c_str());
  std::printf("%s: %d criteria failed\n", failed ? "FAIL" : "PASS", failed);
  return failed ? 1 : 0;
}
