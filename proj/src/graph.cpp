#include "tangle/graph.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <sstream>

#include "tangle/errors.hpp"

namespace tangle {

namespace {

constexpr Vertex kUnmatched = std::numeric_limits<Vertex>::max();

int digit(Vertex v, int n, int j) { return static_cast<int>((v >> (2 * (n - 1 - j))) & 3u); }

Vertex with_digit(Vertex v, int n, int j, int d) {
  const int shift = 2 * (n - 1 - j);
  return (v & ~(Vertex(3) << shift)) | (Vertex(d) << shift);
}

}  // namespace

int cycle_distance(int a, int b) {
  int d = std::abs(a - b);
  return std::min(d, 4 - d);
}

std::string vertex_string(Vertex v, int n) {
  std::string s(static_cast<std::size_t>(n), '0');
  for (int j = 0; j < n; ++j) s[static_cast<std::size_t>(j)] = static_cast<char>('0' + digit(v, n, j));
  return s;
}

Vertex parse_vertex(const std::string& s) {
  if (s.empty() || s.size() > 15) throw Error(ErrorCode::InvalidArgument, "bad symbol '" + s + "'");
  Vertex v = 0;
  for (char c : s) {
    if (c < '0' || c > '3') throw Error(ErrorCode::InvalidArgument, "bad symbol '" + s + "'");
    v = v * 4 + static_cast<Vertex>(c - '0');
  }
  return v;
}

Vertex vertex_from_digits(const std::vector<int>& digits) {
  Vertex v = 0;
  for (int d : digits) {
    if (d < 0 || d > 3) throw Error(ErrorCode::InvalidArgument, "symbol entries must lie in {0,1,2,3}");
    v = v * 4 + static_cast<Vertex>(d);
  }
  return v;
}

std::vector<int> vertex_digits(Vertex v, int n) {
  std::vector<int> d(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) d[static_cast<std::size_t>(j)] = digit(v, n, j);
  return d;
}

Vertex constant_vertex(int d, int n) {
  Vertex v = 0;
  for (int j = 0; j < n; ++j) v = v * 4 + static_cast<Vertex>(d);
  return v;
}

std::optional<EdgeLabel> transition_label(const std::vector<int>& s, const std::vector<int>& t) {
  if (s.size() != t.size()) return std::nullopt;
  int changed = -1;
  for (std::size_t j = 0; j < s.size(); ++j) {
    if (s[j] == t[j]) continue;
    if (changed >= 0) return std::nullopt;
    changed = static_cast<int>(j);
  }
  if (changed < 0) return std::nullopt;
  const int a = std::min(s[changed], t[changed]), b = std::max(s[changed], t[changed]);
  if (cycle_distance(a, b) != 1) return std::nullopt;
  auto all_in = [&](int p, int q) {
    return std::all_of(s.begin(), s.end(), [&](int x) { return x == p || x == q; });
  };
  if (a == 0 && b == 1) return EdgeLabel::R;
  if (a == 2 && b == 3) return all_in(2, 3) ? std::optional(EdgeLabel::R) : std::nullopt;
  if (a == 1 && b == 2) return EdgeLabel::L;
  if (a == 0 && b == 3) return all_in(0, 3) ? std::optional(EdgeLabel::L) : std::nullopt;
  return std::nullopt;
}

std::optional<EdgeLabel> TransitionGraph::label(Vertex a, Vertex b) const {
  if (a >= adjacency.size()) return std::nullopt;
  for (const auto& [w, l] : adjacency[a])
    if (w == b) return l;
  return std::nullopt;
}

std::size_t TransitionGraph::edge_count(EdgeLabel l) const {
  std::size_t c = 0;
  for (Vertex v = 0; v < adjacency.size(); ++v)
    for (const auto& [w, lab] : adjacency[v])
      if (lab == l && v < w) ++c;
  return c;
}

TransitionGraph build_graph(int n, int max_n) {
  if (n < 1 || n > max_n || n > 15) throw Error(ErrorCode::InvalidArgument, "graph size n out of range");
  TransitionGraph g;
  g.n = n;
  const Vertex V = Vertex(1) << (2 * n);
  g.adjacency.resize(V);
  for (Vertex v = 0; v < V; ++v) {
    auto s = vertex_digits(v, n);
    for (int j = 0; j < n; ++j) {
      for (int step : {1, 3}) {
        auto t = s;
        t[static_cast<std::size_t>(j)] = (s[static_cast<std::size_t>(j)] + step) % 4;
        if (auto l = transition_label(s, t)) g.adjacency[v].push_back({with_digit(v, n, j, t[j]), *l});
      }
    }
    std::sort(g.adjacency[v].begin(), g.adjacency[v].end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
  }
  return g;
}

LRCycle canonical(const LRCycle& c) {
  const std::size_t m = c.vertices.size();
  if (m == 0) return c;
  const std::size_t i0 =
      static_cast<std::size_t>(std::min_element(c.vertices.begin(), c.vertices.end()) - c.vertices.begin());
  LRCycle out;
  out.vertices.reserve(m);
  out.labels.reserve(m);
  if (c.labels[i0] == EdgeLabel::R) {
    for (std::size_t k = 0; k < m; ++k) {
      out.vertices.push_back(c.vertices[(i0 + k) % m]);
      out.labels.push_back(c.labels[(i0 + k) % m]);
    }
  } else {
    for (std::size_t k = 0; k < m; ++k) {
      const std::size_t i = (i0 + m - k) % m;
      out.vertices.push_back(c.vertices[i]);
      out.labels.push_back(c.labels[(i + m - 1) % m]);
    }
  }
  return out;
}

CyclePartition canonical(const CyclePartition& p) {
  CyclePartition out;
  for (const auto& c : p.cycles) out.cycles.push_back(canonical(c));
  std::sort(out.cycles.begin(), out.cycles.end());
  return out;
}

Validation validate_cycle(const TransitionGraph& g, const LRCycle& c) {
  const std::size_t m = c.vertices.size();
  auto fail = [](std::string msg) { return Validation{false, std::move(msg)}; };
  if (c.labels.size() != m) return fail("label count differs from vertex count");
  if (m < 4) return fail("cycle of length " + std::to_string(m) + " repeats an edge");
  if (m % 2) return fail("odd length cannot alternate");
  std::set<Vertex> seen(c.vertices.begin(), c.vertices.end());
  if (seen.size() != m) return fail("vertex repeated");
  for (std::size_t i = 0; i < m; ++i) {
    const Vertex a = c.vertices[i], b = c.vertices[(i + 1) % m];
    auto l = g.label(a, b);
    if (!l) return fail("no edge " + vertex_string(a, g.n) + " -> " + vertex_string(b, g.n));
    if (*l != c.labels[i])
      return fail("edge " + vertex_string(a, g.n) + " -> " + vertex_string(b, g.n) + " has label " + label_char(*l));
    if (c.labels[i] == c.labels[(i + 1) % m])
      return fail("labels do not alternate at " + vertex_string(b, g.n));
  }
  return {};
}

Validation validate_partition(const TransitionGraph& g, const CyclePartition& p) {
  std::vector<int> count(g.vertex_count(), 0);
  for (const auto& c : p.cycles) {
    auto v = validate_cycle(g, c);
    if (!v.ok) return v;
    for (Vertex x : c.vertices) ++count[x];
  }
  for (Vertex v = 0; v < count.size(); ++v)
    if (count[v] != 1)
      return {false, "vertex " + vertex_string(v, g.n) + " covered " + std::to_string(count[v]) + " times"};
  return {};
}

std::vector<Matching> perfect_matchings(const TransitionGraph& g, EdgeLabel l, std::uint64_t budget,
                                        bool* exceeded) {
  const std::size_t V = g.vertex_count();
  std::vector<Matching> out;
  Matching mate(V, kUnmatched);
  bool over = false;
  std::function<void(Vertex)> rec = [&](Vertex from) {
    if (over) return;
    Vertex v = from;
    while (v < V && mate[v] != kUnmatched) ++v;
    if (v == V) {
      if (out.size() >= budget) {
        over = true;
        return;
      }
      out.push_back(mate);
      return;
    }
    for (const auto& [w, lab] : g.adjacency[v]) {
      if (lab != l || mate[w] != kUnmatched) continue;
      mate[v] = w;
      mate[w] = v;
      rec(v + 1);
      mate[v] = kUnmatched;
      mate[w] = kUnmatched;
      if (over) return;
    }
  };
  rec(0);
  if (exceeded) *exceeded = over;
  return out;
}

CyclePartition partition_from_matchings(const TransitionGraph& g, const Matching& ml, const Matching& mr) {
  const std::size_t V = g.vertex_count();
  std::vector<char> seen(V, 0);
  CyclePartition p;
  for (Vertex v = 0; v < V; ++v) {
    if (seen[v]) continue;
    LRCycle c;
    Vertex cur = v;
    bool r = true;
    do {
      seen[cur] = 1;
      c.vertices.push_back(cur);
      c.labels.push_back(r ? EdgeLabel::R : EdgeLabel::L);
      cur = r ? mr[cur] : ml[cur];
      r = !r;
    } while (cur != v);
    p.cycles.push_back(std::move(c));
  }
  return p;
}

EnumerationStats for_each_partition(const TransitionGraph& g, std::uint64_t budget,
                                    const std::function<bool(const Matching&, const Matching&)>& visit) {
  EnumerationStats st;
  bool ex_l = false, ex_r = false;
  auto Ls = perfect_matchings(g, EdgeLabel::L, budget, &ex_l);
  auto Rs = perfect_matchings(g, EdgeLabel::R, budget, &ex_r);
  st.l_matchings = Ls.size();
  st.r_matchings = Rs.size();
  st.budget_exceeded = ex_l || ex_r;
  for (const auto& ml : Ls) {
    for (const auto& mr : Rs) {
      if (st.visited >= budget) {
        st.budget_exceeded = true;
        return st;
      }
      ++st.visited;
      if (!visit(ml, mr)) return st;
    }
  }
  return st;
}

PartitionEnumeration enumerate_partitions(const TransitionGraph& g, std::uint64_t budget) {
  PartitionEnumeration e;
  auto st = for_each_partition(g, budget, [&](const Matching& ml, const Matching& mr) {
    e.partitions.push_back(partition_from_matchings(g, ml, mr));
    return true;
  });
  e.total = st.visited;
  e.budget_exceeded = st.budget_exceeded;
  return e;
}

std::optional<std::uint64_t> find_partition(const TransitionGraph& g, const CyclePartition& p,
                                            std::uint64_t budget) {
  if (!validate_partition(g, p).ok) return std::nullopt;
  const std::size_t V = g.vertex_count();
  Matching ml(V, kUnmatched), mr(V, kUnmatched);
  for (const auto& c : p.cycles) {
    const std::size_t m = c.vertices.size();
    for (std::size_t i = 0; i < m; ++i) {
      Vertex a = c.vertices[i], b = c.vertices[(i + 1) % m];
      Matching& mt = c.labels[i] == EdgeLabel::L ? ml : mr;
      mt[a] = b;
      mt[b] = a;
    }
  }
  bool ex_l = false, ex_r = false;
  auto Ls = perfect_matchings(g, EdgeLabel::L, budget, &ex_l);
  auto Rs = perfect_matchings(g, EdgeLabel::R, budget, &ex_r);
  auto il = std::find(Ls.begin(), Ls.end(), ml);
  auto ir = std::find(Rs.begin(), Rs.end(), mr);
  if (il == Ls.end() || ir == Rs.end()) return std::nullopt;
  return static_cast<std::uint64_t>(il - Ls.begin()) * Rs.size() + static_cast<std::uint64_t>(ir - Rs.begin());
}

LRCycle explicit_long_cycle(int n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "n must be positive");
  LRCycle c;
  std::vector<int> s(static_cast<std::size_t>(n), 0);
  auto push = [&](EdgeLabel l) {
    c.vertices.push_back(vertex_from_digits(s));
    c.labels.push_back(l);
  };
  // raise each coordinate 0 -> 1 -> 2, reaching (2...2)
  for (int j = 0; j < n; ++j) {
    push(EdgeLabel::R);
    s[static_cast<std::size_t>(j)] = 1;
    push(EdgeLabel::L);
    s[static_cast<std::size_t>(j)] = 2;
  }
  // (2...2) -> (32...2), then lower the tail back to zeros, then close through (30...0)
  push(EdgeLabel::R);
  s[0] = 3;
  for (int j = 1; j < n; ++j) {
    push(EdgeLabel::L);
    s[static_cast<std::size_t>(j)] = 1;
    push(EdgeLabel::R);
    s[static_cast<std::size_t>(j)] = 0;
  }
  push(EdgeLabel::L);
  return c;
}

namespace {

struct P1Accumulator {
  const TransitionGraph& g;
  P1Report& rep;
  Vertex s0, s2;

  void check(const std::vector<std::size_t>& lengths, std::size_t id0, std::size_t id2,
             const std::function<std::string()>& describe) {
    ++rep.partitions_checked;
    for (std::size_t len : lengths) {
      ++rep.length_histogram[len];
      if (len % 4 && rep.lengths_mod4) {
        rep.lengths_mod4 = false;
        if (!rep.violation) rep.violation = "cycle length " + std::to_string(len) + " in " + describe();
      }
    }
    if (id0 != id2 && rep.s0_s2_same_cycle) {
      rep.s0_s2_same_cycle = false;
      if (!rep.violation) rep.violation = "s0 and s2 on different cycles in " + describe();
    }
    const std::size_t l0 = lengths[id0];
    if (rep.min_s0_cycle_length == 0 || l0 < rep.min_s0_cycle_length) rep.min_s0_cycle_length = l0;
    if (l0 < 4 * static_cast<std::size_t>(g.n) && rep.long_enough) {
      rep.long_enough = false;
      if (!rep.violation) rep.violation = "cycle through s0 has length " + std::to_string(l0) + " in " + describe();
    }
  }
};

std::string describe_partition(const TransitionGraph& g, const CyclePartition& p) {
  std::ostringstream os;
  for (const auto& c : p.cycles) {
    os << '(';
    for (std::size_t i = 0; i < c.vertices.size(); ++i) os << (i ? " " : "") << vertex_string(c.vertices[i], g.n);
    os << ')';
  }
  return os.str();
}

void explicit_check(const TransitionGraph& g, P1Report& rep) {
  LRCycle c = explicit_long_cycle(g.n);
  rep.explicit_cycle_length = c.length();
  rep.explicit_cycle_valid = validate_cycle(g, c).ok && c.length() == 4 * static_cast<std::size_t>(g.n);
}

}  // namespace

P1Report theorem_p1_report(const TransitionGraph& g, std::uint64_t budget) {
  P1Report rep;
  rep.n = g.n;
  P1Accumulator acc{g, rep, constant_vertex(0, g.n), constant_vertex(2, g.n)};
  const std::size_t V = g.vertex_count();
  std::vector<std::size_t> id(V), lengths;
  auto st = for_each_partition(g, budget, [&](const Matching& ml, const Matching& mr) {
    std::fill(id.begin(), id.end(), std::numeric_limits<std::size_t>::max());
    lengths.clear();
    for (Vertex v = 0; v < V; ++v) {
      if (id[v] != std::numeric_limits<std::size_t>::max()) continue;
      std::size_t len = 0;
      Vertex cur = v;
      bool r = true;
      do {
        id[cur] = lengths.size();
        ++len;
        cur = r ? mr[cur] : ml[cur];
        r = !r;
      } while (cur != v);
      lengths.push_back(len);
    }
    acc.check(lengths, id[acc.s0], id[acc.s2],
              [&] { return describe_partition(g, partition_from_matchings(g, ml, mr)); });
    return true;
  });
  rep.budget_exceeded = st.budget_exceeded;
  explicit_check(g, rep);
  return rep;
}

P1Report theorem_p1_report(const TransitionGraph& g, const std::vector<CyclePartition>& partitions) {
  P1Report rep;
  rep.n = g.n;
  P1Accumulator acc{g, rep, constant_vertex(0, g.n), constant_vertex(2, g.n)};
  for (const auto& p : partitions) {
    std::vector<std::size_t> lengths;
    std::size_t id0 = std::numeric_limits<std::size_t>::max(), id2 = id0 - 1;
    for (std::size_t i = 0; i < p.cycles.size(); ++i) {
      lengths.push_back(p.cycles[i].length());
      for (Vertex v : p.cycles[i].vertices) {
        if (v == acc.s0) id0 = i;
        if (v == acc.s2) id2 = i;
      }
    }
    if (id0 >= lengths.size()) {
      rep.s0_s2_same_cycle = false;
      if (!rep.violation) rep.violation = "s0 not covered in " + describe_partition(g, p);
      continue;
    }
    acc.check(lengths, id0, id2, [&] { return describe_partition(g, p); });
  }
  explicit_check(g, rep);
  return rep;
}

std::string edge_list(const TransitionGraph& g) {
  std::ostringstream os;
  for (Vertex v = 0; v < g.vertex_count(); ++v)
    for (const auto& [w, l] : g.adjacency[v])
      if (v < w) os << vertex_string(v, g.n) << ' ' << vertex_string(w, g.n) << ' ' << label_char(l) << '\n';
  return os.str();
}

}  // namespace tangle
