#include "rfcw/chain.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <queue>
#include <stdexcept>

namespace rfcw {

void ReversibleChain::add_edge(int a, int b, double log_c) {
  if (a == b) throw std::invalid_argument("self-loop conductance");
  edges_.push_back({a, b, log_c});
  adj_valid_ = false;
}

const std::vector<std::vector<int>>& ReversibleChain::adjacency() const {
  if (!adj_valid_) {
    adj_.assign(num_states(), {});
    for (int e = 0; e < num_edges(); ++e) {
      adj_[edges_[e].a].push_back(e);
      adj_[edges_[e].b].push_back(e);
    }
    adj_valid_ = true;
  }
  return adj_;
}

double ReversibleChain::holding_probability(int state) const {
  double s = 0.0;
  for (int e : adjacency()[state])
    s += std::exp(edges_[e].log_c - log_mu_[state]);
  return 1.0 - s;
}

double ReversibleChain::max_row_sum() const {
  double worst = 0.0;
  for (int x = 0; x < num_states(); ++x) {
    double s = 0.0;
    for (int e : adjacency()[x]) s += std::exp(edges_[e].log_c - log_mu_[x]);
    worst = std::max(worst, s);
  }
  return worst;
}

bool ReversibleChain::connected(const std::vector<int>& a,
                                const std::vector<int>& b) const {
  std::vector<char> seen(num_states(), 0);
  std::queue<int> q;
  for (int s : a) {
    seen[s] = 1;
    q.push(s);
  }
  const auto& adj = adjacency();
  while (!q.empty()) {
    int x = q.front();
    q.pop();
    for (int e : adj[x]) {
      int y = edges_[e].a == x ? edges_[e].b : edges_[e].a;
      if (!seen[y]) {
        seen[y] = 1;
        q.push(y);
      }
    }
  }
  for (int s : b)
    if (seen[s]) return true;
  return false;
}

void ReversibleChain::write_edge_list(std::ostream& os) const {
  os << std::setprecision(17);
  for (const auto& e : edges_) os << e.a << " " << e.b << " " << e.log_c << "\n";
}

}  // namespace rfcw
