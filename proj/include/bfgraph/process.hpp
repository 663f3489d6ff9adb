#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include <json.hpp>

#include "component_tracker.hpp"
#include "ode.hpp"
#include "random.hpp"
#include "rates.hpp"

namespace bfgraph {

/// Component statistics recorded at one sample time. Raw counts are kept;
/// the normalized quantities divide by the scale parameter n.
struct Stats {
  double t = 0;
  std::uint64_t n = 1;
  std::uint64_t singletons = 0;
  std::uint64_t s2 = 0;
  std::uint64_t s3 = 0;
  std::uint64_t max_size = 0;
  std::uint64_t n_vertices = 0;
  std::uint64_t event_count = 0;
  /// Largest component sizes, nonincreasing; filled only when requested.
  std::vector<std::uint64_t> top;

  double x_bar() const { return static_cast<double>(singletons) / static_cast<double>(n); }
  double s2_bar() const { return static_cast<double>(s2) / static_cast<double>(n); }
  double s3_bar() const { return static_cast<double>(s3) / static_cast<double>(n); }
};

struct Trajectory {
  std::uint64_t n = 0;
  std::uint64_t seed = 0;
  std::vector<Stats> samples;
  ComponentTracker terminal;

  std::vector<double> times() const {
    std::vector<double> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(s.t);
    return out;
  }
};

struct ProcessConfig {
  std::uint64_t n = 0;
  double t_end = 0;
  std::uint64_t seed = 0;
  std::vector<double> grid;
  double horizon = critical_constants().horizon();
  /// Number of largest component sizes recorded with each sample.
  std::size_t record_top_k = 0;
};

enum class EventKind {
  doubleton,   ///< edge joining two singletons
  attachment,  ///< edge joining a singleton to a larger component
  edge,        ///< edge between two non-singleton vertices
};

/// Observer that ignores every event.
struct NoEventObserver {
  void operator()(double, EventKind) const {}
};

/// Component sizes of the four endpoints as seen by a bounded-size rule with
/// cap K: sizes above K all read as K + 1.
struct CappedSizes {
  std::uint64_t v1, v2, v3, v4;
};

/// A bounded-size rule: decides from capped endpoint sizes whether the first
/// offered edge is taken (true) or the second (false).
template <class Decide>
struct BoundedSizeRule {
  std::uint64_t cap;
  Decide decide;
};

template <class Decide>
BoundedSizeRule(std::uint64_t, Decide) -> BoundedSizeRule<Decide>;

inline auto bohman_frieze_rule() {
  return BoundedSizeRule{1, [](const CappedSizes& s) { return s.v1 == 1 && s.v2 == 1; }};
}

inline auto erdos_renyi_rule() {
  return BoundedSizeRule{1, [](const CappedSizes&) { return true; }};
}

namespace detail {

inline void validate_grid(const std::vector<double>& grid, double t_end) {
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 0) || grid[i] > t_end)
      throw std::invalid_argument("sample grid point " + std::to_string(grid[i]) + " outside [0, t_end]");
    if (i > 0 && !(grid[i] > grid[i - 1]))
      throw std::invalid_argument("sample grid must be strictly increasing");
  }
}

inline Stats snapshot(const ComponentTracker& tr, double t, std::uint64_t n, std::uint64_t events,
                      std::size_t top_k) {
  Stats s{t, n, tr.singleton_count(), tr.s2(), tr.s3(), tr.max_size(), tr.n_vertices(), events, {}};
  if (top_k > 0) s.top = tr.largest_components(top_k);
  return s;
}

/// Uniform unordered pair of distinct vertices out of `count`.
inline std::pair<Vertex, Vertex> random_pair(Engine& rng, std::uint64_t count) {
  const auto u = static_cast<Vertex>(uniform_below(rng, count));
  auto v = static_cast<Vertex>(uniform_below(rng, count - 1));
  if (v >= u) ++v;
  return {u, v};
}

inline EventKind classify(ComponentTracker& tr, Vertex u, Vertex v) {
  const bool su = tr.is_singleton(u), sv = tr.is_singleton(v);
  if (su && sv) return EventKind::doubleton;
  if (su || sv) return EventKind::attachment;
  return EventKind::edge;
}

}  // namespace detail

/// Two-choice process on n fixed vertices. Every ordered pair of edges
/// carries a Poisson clock of rate 2/n^3, so events arrive at total rate
/// C(n,2)^2 * 2/n^3; each event offers two independent uniform edges and the
/// rule picks one.
template <class Decide, class Observer = NoEventObserver>
Trajectory run_bounded_size(const ProcessConfig& cfg, const BoundedSizeRule<Decide>& rule,
                            Observer&& observe = {}) {
  if (cfg.n < 2) throw std::invalid_argument("run_bounded_size: n must be >= 2");
  if (!(cfg.t_end >= 0) || cfg.t_end > cfg.horizon)
    throw std::invalid_argument("run_bounded_size: t_end outside [0, horizon]");
  if (rule.cap < 1) throw std::invalid_argument("run_bounded_size: cap must be >= 1");
  detail::validate_grid(cfg.grid, cfg.t_end);

  const double n = static_cast<double>(cfg.n);
  const double edges = n * (n - 1) / 2;
  const double total_rate = edges * edges * 2.0 / (n * n * n);

  Trajectory traj;
  traj.n = cfg.n;
  traj.seed = cfg.seed;
  traj.samples.reserve(cfg.grid.size());
  ComponentTracker tr(cfg.n);
  Engine rng = make_engine(cfg.seed);

  std::uint64_t events = 0;
  std::size_t next_sample = 0;
  double t = 0;
  for (;;) {
    t += exponential(rng, total_rate);
    while (next_sample < cfg.grid.size() && cfg.grid[next_sample] < t)
      traj.samples.push_back(detail::snapshot(tr, cfg.grid[next_sample++], cfg.n, events, cfg.record_top_k));
    if (t > cfg.t_end) break;
    ++events;
    const auto e1 = detail::random_pair(rng, cfg.n);
    const auto e2 = detail::random_pair(rng, cfg.n);
    const auto cap = [&](Vertex v) { return std::min(tr.component_size(v), rule.cap + 1); };
    const CappedSizes sizes{cap(e1.first), cap(e1.second), cap(e2.first), cap(e2.second)};
    const auto& chosen = rule.decide(sizes) ? e1 : e2;
    if constexpr (!std::is_same_v<std::decay_t<Observer>, NoEventObserver>) {
      if (tr.find(chosen.first) != tr.find(chosen.second))
        observe(t, detail::classify(tr, chosen.first, chosen.second));
    }
    tr.merge(chosen.first, chosen.second);
  }
  traj.terminal = std::move(tr);
  return traj;
}

template <class Observer = NoEventObserver>
Trajectory run_bf(const ProcessConfig& cfg, Observer&& observe = {}) {
  return run_bounded_size(cfg, bohman_frieze_rule(), std::forward<Observer>(observe));
}

template <class Observer = NoEventObserver>
Trajectory run_er(const ProcessConfig& cfg, Observer&& observe = {}) {
  return run_bounded_size(cfg, erdos_renyi_rule(), std::forward<Observer>(observe));
}

/// Random graph with immigrating doubletons and attachment, started from the
/// null graph. Immigration, attachment and edge streams are thinned against
/// the bounds n, |V| and C(|V|,2)/n, which dominate because a, b, c <= 1.
/// Vertex 0 always belongs to the first immigrating doubleton.
inline Trajectory run_rgiva(const ProcessConfig& cfg, const RateFunctions& rates) {
  if (cfg.n < 1) throw std::invalid_argument("run_rgiva: n must be >= 1");
  if (!(cfg.t_end >= 0) || cfg.t_end > rates.horizon() * (1 + 1e-12))
    throw std::out_of_range("run_rgiva: t_end outside the rate horizon");
  detail::validate_grid(cfg.grid, cfg.t_end);

  const double n = static_cast<double>(cfg.n);
  Trajectory traj;
  traj.n = cfg.n;
  traj.seed = cfg.seed;
  traj.samples.reserve(cfg.grid.size());
  ComponentTracker tr;
  Engine rng = make_engine(cfg.seed);

  std::uint64_t events = 0;
  std::size_t next_sample = 0;
  double t = 0;
  for (;;) {
    const auto vertices = static_cast<double>(tr.n_vertices());
    const double immigration = n;
    const double attachment = vertices;
    const double edge = vertices * (vertices - 1) / (2 * n);
    const double total = immigration + attachment + edge;
    t += exponential(rng, total);
    while (next_sample < cfg.grid.size() && cfg.grid[next_sample] < t)
      traj.samples.push_back(detail::snapshot(tr, cfg.grid[next_sample++], cfg.n, events, cfg.record_top_k));
    if (t > cfg.t_end) break;
    const double pick = uniform01(rng) * total;
    const double accept = uniform01(rng);
    if (pick < immigration) {
      if (accept < rates.a(t)) {
        const Vertex u = tr.add_vertex();
        const Vertex v = tr.add_vertex();
        tr.merge(u, v);
        ++events;
      }
    } else if (pick < immigration + attachment) {
      if (accept < rates.c(t) && tr.n_vertices() > 0) {
        const auto anchor = static_cast<Vertex>(uniform_below(rng, tr.n_vertices()));
        tr.merge(anchor, tr.add_vertex());
        ++events;
      }
    } else if (tr.n_vertices() >= 2) {
      if (accept < rates.b(t)) {
        const auto [u, v] = detail::random_pair(rng, tr.n_vertices());
        tr.merge(u, v);
        ++events;
      }
    }
  }
  traj.terminal = std::move(tr);
  return traj;
}

/// Size of the component holding the first immigrating doubleton (0 if none).
inline std::uint64_t first_doubleton_component(Trajectory& traj) {
  return traj.terminal.n_vertices() == 0 ? 0 : traj.terminal.component_size(0);
}

/// Stats at the latest sample time <= t.
inline const Stats& snapshot_stats(const Trajectory& traj, double t) {
  if (traj.samples.empty() || t < traj.samples.front().t)
    throw std::out_of_range("snapshot_stats: t precedes the first sample");
  auto it = std::upper_bound(traj.samples.begin(), traj.samples.end(), t,
                             [](double value, const Stats& s) { return value < s.t; });
  return *std::prev(it);
}

// ---------------------------------------------------------------------------
// Serialization.

inline void write_csv(std::ostream& os, const Trajectory& traj) {
  os << "t,x_bar,s2_bar,s3_bar,max_size,n_vertices\n";
  os.precision(17);
  for (const auto& s : traj.samples)
    os << s.t << ',' << s.x_bar() << ',' << s.s2_bar() << ',' << s.s3_bar() << ',' << s.max_size << ','
       << s.n_vertices << '\n';
}

inline nlohmann::json to_json(const Trajectory& traj) {
  nlohmann::json samples = nlohmann::json::array();
  for (const auto& s : traj.samples)
    samples.push_back({{"t", s.t},
                       {"x_bar", s.x_bar()},
                       {"s2_bar", s.s2_bar()},
                       {"s3_bar", s.s3_bar()},
                       {"max_size", s.max_size},
                       {"n_vertices", s.n_vertices},
                       {"event_count", s.event_count}});
  return {{"n", traj.n}, {"seed", traj.seed}, {"samples", std::move(samples)}};
}

/// Uniform grid of `points` times over [0, t_end].
inline std::vector<double> uniform_grid(double t_end, std::size_t points) {
  std::vector<double> grid;
  if (points == 0) return grid;
  if (points == 1) return {t_end};
  grid.reserve(points);
  for (std::size_t i = 0; i < points; ++i)
    grid.push_back(t_end * static_cast<double>(i) / static_cast<double>(points - 1));
  return grid;
}

}  // namespace bfgraph
