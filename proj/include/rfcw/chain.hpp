#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace rfcw {

// Finite reversible chain stored as a conductance graph.  Conductances
// c(x,y) = mu(x) p(x,y) and stationary weights mu are kept as logs because
// they span e^{+-beta N F} across a landscape.  Weights are unnormalized;
// capacities and hitting times computed from them carry the same overall
// factor, which cancels in every ratio we report (Z*cap, mean times).
class ReversibleChain {
 public:
  struct Edge {
    int a = 0;
    int b = 0;
    double log_c = 0.0;
  };

  explicit ReversibleChain(int num_states = 0) : log_mu_(num_states, 0.0) {}

  int num_states() const { return static_cast<int>(log_mu_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }

  void set_log_mu(int state, double log_mu) { log_mu_[state] = log_mu; }
  double log_mu(int state) const { return log_mu_[state]; }

  void add_edge(int a, int b, double log_c);
  const std::vector<Edge>& edges() const { return edges_; }

  // adjacency: for each state, indices into edges()
  const std::vector<std::vector<int>>& adjacency() const;

  // log p(x,y) = log_c - log_mu(x); holding absorbs the remainder.
  double holding_probability(int state) const;

  // true if every queried pair of states is connected through edges
  bool connected(const std::vector<int>& a, const std::vector<int>& b) const;

  // max over edges of |c(x,y)/mu(x)| row sums must stay <= 1 for a proper
  // discrete-time chain; returns the largest row sum of transition probs.
  double max_row_sum() const;

  // Edge-list export: "state_a state_b log_conductance" per line.
  void write_edge_list(std::ostream& os) const;

  // optional state labels (legend file support)
  std::vector<std::string> state_labels;

 private:
  std::vector<double> log_mu_;
  std::vector<Edge> edges_;
  mutable std::vector<std::vector<int>> adj_;
  mutable bool adj_valid_ = false;
};

// Edge-indexed nonnegative unit flow from A to B.  Values are stored per
// oriented edge (the orientation is edge.a -> edge.b when positive,
// edge.b -> edge.a when the stored value is negative is *not* allowed;
// direction is explicit).
struct UnitFlow {
  struct Arc {
    int from = 0;
    int to = 0;
    int edge_index = -1;  // into chain.edges()
    double value = 0.0;   // > 0
  };
  std::vector<Arc> arcs;
  std::vector<int> source;  // A
  std::vector<int> sink;    // B
};

}  // namespace rfcw
