// Bayesian networks of binary nodes sampled ancestrally with one p-bit per node.

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "pcomp/pbit.hpp"
#include "pcomp/rng.hpp"

namespace pcomp::bayes {

inline constexpr std::size_t kMaxParents = 16;

/// A binary node. CPT row r holds P(node = 1) for the parent configuration
/// whose j-th parent takes bit (r >> j) & 1.
struct Node {
  std::string name;
  int generation = 0;
  std::vector<std::size_t> parents;
  std::vector<double> cpt;
};

class BayesNet {
 public:
  std::size_t add_node(std::string name, int generation = 0, std::vector<double> cpt = {}) {
    if (index_.contains(name)) throw std::invalid_argument("duplicate node name '" + name + "'");
    index_.emplace(name, nodes_.size());
    nodes_.push_back({std::move(name), generation, {}, std::move(cpt)});
    rebuild_order();
    return nodes_.size() - 1;
  }

  void add_edge(std::size_t parent, std::size_t child) {
    if (parent >= nodes_.size() || child >= nodes_.size()) throw std::out_of_range("edge endpoint out of range");
    nodes_[child].parents.push_back(parent);
    rebuild_order();
  }

  void set_cpt(std::size_t node, std::vector<double> cpt) { nodes_.at(node).cpt = std::move(cpt); }

  std::size_t size() const { return nodes_.size(); }
  const Node& node(std::size_t i) const { return nodes_.at(i); }
  const std::vector<Node>& nodes() const { return nodes_; }

  std::optional<std::size_t> find(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  std::size_t index_of(const std::string& name) const {
    auto i = find(name);
    if (!i) throw std::out_of_range("no node named '" + name + "'");
    return *i;
  }

  /// Cached topological order; empty optional when the graph has a cycle.
  const std::optional<std::vector<std::size_t>>& topological_order() const { return order_; }

 private:
  // Kahn's algorithm, lowest index first among ready nodes.
  void rebuild_order() {
    const std::size_t n = nodes_.size();
    std::vector<std::size_t> indegree(n, 0);
    std::vector<std::vector<std::size_t>> children(n);
    for (std::size_t c = 0; c < n; ++c)
      for (std::size_t p : nodes_[c].parents) {
        children[p].push_back(c);
        ++indegree[c];
      }
    std::vector<std::size_t> order;
    order.reserve(n);
    std::vector<bool> done(n, false);
    for (std::size_t pass = 0; pass < n; ++pass) {
      std::size_t pick = n;
      for (std::size_t i = 0; i < n; ++i)
        if (!done[i] && indegree[i] == 0) {
          pick = i;
          break;
        }
      if (pick == n) {
        order_.reset();
        return;
      }
      done[pick] = true;
      order.push_back(pick);
      for (std::size_t c : children[pick]) --indegree[c];
    }
    order_ = std::move(order);
  }

  std::vector<Node> nodes_;
  std::unordered_map<std::string, std::size_t> index_;
  std::optional<std::vector<std::size_t>> order_ = std::vector<std::size_t>{};
};

struct Diagnostic {
  enum class Kind { CyclicGraph, TooManyParents, CptSize, CptRange, DuplicateParent };
  Kind kind;
  std::size_t node;
  std::string message;
};

/// Structural and numerical checks; reports every problem found, never throws.
inline std::vector<Diagnostic> validate(const BayesNet& net) {
  std::vector<Diagnostic> out;
  if (!net.topological_order()) out.push_back({Diagnostic::Kind::CyclicGraph, 0, "graph contains a cycle"});
  for (std::size_t i = 0; i < net.size(); ++i) {
    const Node& v = net.node(i);
    if (v.parents.size() > kMaxParents) {
      out.push_back({Diagnostic::Kind::TooManyParents, i,
                     v.name + ": " + std::to_string(v.parents.size()) + " parents (limit 16)"});
      continue;
    }
    for (std::size_t a = 0; a < v.parents.size(); ++a)
      for (std::size_t b = a + 1; b < v.parents.size(); ++b)
        if (v.parents[a] == v.parents[b])
          out.push_back({Diagnostic::Kind::DuplicateParent, i, v.name + ": repeated parent " + net.node(v.parents[a]).name});
    const std::size_t rows = std::size_t{1} << v.parents.size();
    if (v.cpt.size() != rows)
      out.push_back({Diagnostic::Kind::CptSize, i,
                     v.name + ": CPT has " + std::to_string(v.cpt.size()) + " rows, expected " + std::to_string(rows)});
    for (std::size_t r = 0; r < v.cpt.size(); ++r)
      if (!(v.cpt[r] >= 0.0 && v.cpt[r] <= 1.0))
        out.push_back({Diagnostic::Kind::CptRange, i,
                       v.name + ": CPT row " + std::to_string(r) + " = " + std::to_string(v.cpt[r]) + " outside [0,1]"});
  }
  return out;
}

inline std::size_t cpt_row(const Node& v, const std::vector<std::uint8_t>& bits) {
  std::size_t row = 0;
  for (std::size_t j = 0; j < v.parents.size(); ++j) row |= static_cast<std::size_t>(bits[v.parents[j]]) << j;
  return row;
}

/// One joint draw. Each node consumes exactly one uniform, in topological
/// order, and fires through a p-bit with input logit(P(v=1 | parents)).
/// Probabilities of exactly 0 or 1 clamp the bit.
template <UniformSource Rng>
void ancestral_sample(const BayesNet& net, Rng& rng, std::vector<std::uint8_t>& bits) {
  const auto& order = net.topological_order();
  if (!order) throw std::logic_error("ancestral sampling needs an acyclic network");
  bits.assign(net.size(), 0);
  for (std::size_t v : *order) {
    const Node& node = net.node(v);
    const double p = node.cpt[cpt_row(node, bits)];
    const double u = rng.uniform01();
    if (p <= 0.0)
      bits[v] = 0;
    else if (p >= 1.0)
      bits[v] = 1;
    else
      bits[v] = static_cast<std::uint8_t>(pbit_sample(logit(p), u));
  }
}

template <UniformSource Rng>
std::vector<std::uint8_t> ancestral_sample(const BayesNet& net, Rng& rng) {
  std::vector<std::uint8_t> bits;
  ancestral_sample(net, rng, bits);
  return bits;
}

/// Running Pearson correlation of two +-1 series.
class Correlation {
 public:
  void add(int x, int y) {
    ++n_;
    sx_ += x;
    sy_ += y;
    sxy_ += x * y;
  }

  std::uint64_t count() const { return n_; }
  bool defined() const { return n_ > 0 && var_x() > 0 && var_y() > 0; }

  double value() const {
    if (!defined()) throw std::domain_error("correlation undefined: a node has zero variance");
    const double n = static_cast<double>(n_);
    const double cov = static_cast<double>(sxy_) / n - mean_x() * mean_y();
    return cov / std::sqrt(var_x() * var_y());
  }

 private:
  double mean_x() const { return static_cast<double>(sx_) / static_cast<double>(n_); }
  double mean_y() const { return static_cast<double>(sy_) / static_cast<double>(n_); }
  // Second moments of a +-1 variable are exactly 1.
  double var_x() const { return 1.0 - mean_x() * mean_x(); }
  double var_y() const { return 1.0 - mean_y() * mean_y(); }

  std::uint64_t n_ = 0;
  std::int64_t sx_ = 0, sy_ = 0, sxy_ = 0;
};

inline int bipolar(std::uint8_t bit) { return 2 * static_cast<int>(bit) - 1; }

template <UniformSource Rng>
double estimate_correlation(const BayesNet& net, std::size_t a, std::size_t b, std::size_t samples, Rng& rng) {
  if (a >= net.size() || b >= net.size()) throw std::out_of_range("correlation node index out of range");
  Correlation corr;
  std::vector<std::uint8_t> bits;
  for (std::size_t k = 0; k < samples; ++k) {
    ancestral_sample(net, rng, bits);
    corr.add(bipolar(bits[a]), bipolar(bits[b]));
  }
  return corr.value();
}

// ---------------------------------------------------------------------------
// Family trees

struct FamilyTreeSpec {
  enum class Pairing {
    MarryIn,      ///< every child who has offspring marries a new, unrelated founder
    CrossFamily,  ///< children pair up in order across families; an odd one out marries in
  };

  std::size_t generations = 3;
  std::size_t founder_couples = 1;
  std::size_t children_per_couple = 1;
  Pairing pairing = Pairing::MarryIn;
};

/// Founders are fair coins; a child copies the bit of a uniformly chosen
/// parent, i.e. P(child = 1 | m, f) = (m + f) / 2.
///
/// Names: founders "F<g>_<k>", children "C<g>_<k>" for generation g.
inline BayesNet build_family_tree(const FamilyTreeSpec& spec) {
  if (spec.generations < 1) throw std::invalid_argument("family tree needs at least one generation");
  if (spec.founder_couples < 1 || spec.children_per_couple < 1)
    throw std::invalid_argument("family tree needs at least one couple and one child per couple");
  BayesNet net;
  const std::vector<double> founder_cpt{0.5};
  const std::vector<double> child_cpt{0.0, 0.5, 0.5, 1.0};

  std::size_t founder_count = 0;
  auto founder = [&](int g) {
    return net.add_node("F" + std::to_string(g) + "_" + std::to_string(founder_count++), g, founder_cpt);
  };

  std::vector<std::pair<std::size_t, std::size_t>> couples;
  for (std::size_t c = 0; c < spec.founder_couples; ++c) {
    const std::size_t m = founder(0);
    const std::size_t f = founder(0);
    couples.emplace_back(m, f);
  }
  for (std::size_t g = 1; g < spec.generations; ++g) {
    const int gen = static_cast<int>(g);
    std::vector<std::size_t> children;
    std::size_t k = 0;
    for (auto [m, f] : couples)
      for (std::size_t j = 0; j < spec.children_per_couple; ++j) {
        const std::size_t c = net.add_node("C" + std::to_string(g) + "_" + std::to_string(k++), gen, child_cpt);
        net.add_edge(m, c);
        net.add_edge(f, c);
        children.push_back(c);
      }
    couples.clear();
    if (g + 1 == spec.generations) break;
    std::size_t i = 0;
    if (spec.pairing == FamilyTreeSpec::Pairing::CrossFamily)
      for (; i + 1 < children.size(); i += 2) couples.emplace_back(children[i], children[i + 1]);
    for (; i < children.size(); ++i) couples.emplace_back(children[i], founder(gen));
  }
  return net;
}

// ---------------------------------------------------------------------------
// Text format
//
//   [nodes]
//   name [generation]
//   [edges]
//   parent child
//   [cpt]
//   name p_0 p_1 ... p_(2^k - 1)
//
// Parent j of a node is its j-th incoming edge in file order. '#' starts a
// comment.

inline BayesNet parse_net(std::istream& in) {
  BayesNet net;
  std::string line, section;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& what) {
    throw std::runtime_error("net file line " + std::to_string(lineno) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string first;
    if (!(ls >> first)) continue;
    if (first.front() == '[') {
      if (first != "[nodes]" && first != "[edges]" && first != "[cpt]") fail("unknown section " + first);
      section = first;
      continue;
    }
    if (section == "[nodes]") {
      int gen = 0;
      ls >> gen;
      net.add_node(first, gen);
    } else if (section == "[edges]") {
      std::string child;
      if (!(ls >> child)) fail("edge needs parent and child");
      auto p = net.find(first), c = net.find(child);
      if (!p || !c) fail("edge references unknown node");
      net.add_edge(*p, *c);
    } else if (section == "[cpt]") {
      auto v = net.find(first);
      if (!v) fail("CPT for unknown node " + first);
      std::vector<double> rows;
      double p;
      while (ls >> p) rows.push_back(p);
      if (!ls.eof()) fail("malformed probability");
      net.set_cpt(*v, std::move(rows));
    } else {
      fail("content outside a section");
    }
  }
  return net;
}

inline void write_net(std::ostream& out, const BayesNet& net) {
  const auto old = out.precision(17);
  out << "[nodes]\n";
  for (const Node& v : net.nodes()) out << v.name << ' ' << v.generation << '\n';
  out << "[edges]\n";
  for (const Node& v : net.nodes())
    for (std::size_t p : v.parents) out << net.node(p).name << ' ' << v.name << '\n';
  out << "[cpt]\n";
  for (const Node& v : net.nodes()) {
    out << v.name;
    for (double p : v.cpt) out << ' ' << p;
    out << '\n';
  }
  out.precision(old);
}

}  // namespace pcomp::bayes
