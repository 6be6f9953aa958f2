// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <iterator>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "bdbbm/core/event_log.hpp"
#include "bdbbm/core/rng.hpp"
#include "bdbbm/np/simulator.hpp"
#include "bdbbm/np/spec.hpp"

namespace bdbbm {

/// Sorted set of indices in 1..N.
using ClanState = std::vector<std::size_t>;

/// Per-index marks on [0, t] without any positions: clans need nothing else.
inline std::vector<RingRec> generate_ring_marks(const NPSpec& spec, std::size_t n, double t, Rng& rng) {
  spec.validate();
  if (n < spec.k) throw std::invalid_argument("generate_ring_marks: need N >= k");
  std::vector<RingRec> marks;
  SubsetSampler subsets(n);
  PairSampler pairs(spec);
  const double rate = spec.lambda * static_cast<double>(spec.k) * static_cast<double>(n);
  if (!(rate > 0.0)) return marks;
  double s = rng.exponential(rate);
  while (s <= t) {
    RingRec r;
    r.t = s;
    r.index = static_cast<std::size_t>(rng.integer(1, n));
    subsets.draw_excluding(spec.k - 1, r.index, rng, r.S);
    std::tie(r.a, r.b) = pairs.draw(rng);
    marks.push_back(std::move(r));
    s += rng.exponential(rate);
  }
  return marks;
}

namespace detail {

inline std::size_t clan_universe(const std::vector<RingRec>& marks, std::size_t root) {
  std::size_t n = root;
  for (const auto& m : marks) {
    n = std::max(n, m.index);
    for (auto v : m.S) n = std::max(n, v);
  }
  return n;
}

template <class It>
ClanState grow_clan(It first, It last, std::size_t root, std::size_t n) {
  std::vector<char> in(n + 1, 0);
  in[root] = 1;
  for (auto it = first; it != last; ++it)
    if (in[it->index])
      for (auto v : it->S) in[v] = 1;
  ClanState out;
  for (std::size_t v = 1; v <= n; ++v)
    if (in[v]) out.push_back(v);
  return out;
}

}  // namespace detail

/// phi_t(root): starts at {root}; each ring of a member at time <= t adds its companion set.
inline ClanState forward_clan(const std::vector<RingRec>& marks, std::size_t root, double t) {
  if (root < 1) throw std::out_of_range("forward_clan: indices start at 1");
  auto last = std::find_if(marks.begin(), marks.end(), [t](const RingRec& m) { return m.t > t; });
  return detail::grow_clan(marks.begin(), last, root, detail::clan_universe(marks, root));
}

/// psi_t(root): the forward dynamics run on the marks of [0, t] reflected by s -> t - s.
inline ClanState ancestor_set(const std::vector<RingRec>& marks, std::size_t root, double t) {
  if (root < 1) throw std::out_of_range("ancestor_set: indices start at 1");
  for (std::size_t m = 1; m < marks.size(); ++m)
    if (!(marks[m].t > marks[m - 1].t)) throw std::invalid_argument("ancestor_set: mark times must be strictly increasing");
  auto last = std::find_if(marks.begin(), marks.end(), [t](const RingRec& m) { return m.t > t; });
  std::reverse_iterator<decltype(last)> rfirst(last), rlast(marks.begin());
  return detail::grow_clan(rfirst, rlast, root, detail::clan_universe(marks, root));
}

inline bool clans_intersect(const ClanState& a, const ClanState& b) {
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i == *j) return true;
    if (*i < *j)
      ++i;
    else
      ++j;
  }
  return false;
}

}  // namespace bdbbm
