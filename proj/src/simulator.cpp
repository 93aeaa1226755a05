#include "catbrw/simulator.h"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/random/discrete_distribution.hpp>

#include "catbrw/errors.h"
#include "catbrw/limit_laws.h"
#include "catbrw/parallel.h"
#include "catbrw/rng.h"

namespace catbrw {

namespace {

struct Event {
  double time;
  std::uint64_t seq;
  double arrival;  // arrival time of the particle whose sojourn ends
  bool sojourn_end;
};

struct Later {
  bool operator()(const Event& a, const Event& b) const noexcept {
    return a.time > b.time || (a.time == b.time && a.seq > b.seq);
  }
};

class Engine {
 public:
  explicit Engine(const SimConfig& cfg)
      : cfg_(cfg),
        offspring_(cfg.offspring.coefficients().begin(), cfg.offspring.coefficients().end()) {
    if (cfg.mode == ExcursionMode::Spatial) sampler_.emplace(*cfg.walk);
  }

  // Returns false when the population cap is hit.
  template <class Sink>
  bool run(std::int64_t index, Sink& sink, std::vector<Event>& heap) const {
    RngStream rng(cfg_.seed, StreamTag::Population, static_cast<std::uint64_t>(index));
    const double T = cfg_.window;
    const auto& probes = cfg_.probes;
    heap.clear();
    std::uint64_t seq = 0;
    std::int64_t mu = 1;
    auto push = [&](double time, double arrival, bool sojourn_end) {
      heap.push_back({time, seq++, arrival, sojourn_end});
      std::push_heap(heap.begin(), heap.end(), Later{});
    };
    push(rng.exponential(1.0), 0.0, true);

    std::size_t next_probe = 0;
    while (!heap.empty()) {
      const Event ev = heap.front();
      if (ev.time >= T) break;
      while (next_probe < probes.size() && probes[next_probe] < ev.time) sink.probe(next_probe++, mu);
      std::pop_heap(heap.begin(), heap.end(), Later{});
      heap.pop_back();
      if (ev.sojourn_end) {
        --mu;
        if constexpr (Sink::kIntervals) sink.interval(ev.arrival, ev.time);
        if (rng.uniform() < cfg_.alpha) {
          const auto children = offspring_(rng);
          for (std::uint32_t c = 0; c < children; ++c) {
            ++mu;
            push(ev.time + rng.exponential(1.0), ev.time, true);
          }
        } else {
          depart(ev.time, rng, push);
        }
      } else {
        ++mu;
        push(ev.time + rng.exponential(1.0), ev.time, true);
      }
      if (static_cast<std::int64_t>(heap.size()) > cfg_.explosion_cap) return false;
    }
    while (next_probe < probes.size()) sink.probe(next_probe++, mu);
    if constexpr (Sink::kIntervals)
      for (const auto& ev : heap)
        if (ev.sojourn_end) sink.interval(ev.arrival, T);
    return true;
  }

 private:
  template <class Push>
  void depart(double now, RngStream& rng, Push& push) const {
    const double remaining = cfg_.window - now;
    if (cfg_.mode == ExcursionMode::Tabulated) {
      if (rng.uniform() < cfg_.h) return;
      const double delta = cfg_.g2->quantile(rng.uniform_pos());
      if (delta < remaining) push(now + delta, 0.0, false);
    } else {
      const ExcursionOutcome o = (*sampler_)(remaining, rng);
      if (o.returned && o.time < remaining) push(now + o.time, 0.0, false);
    }
  }

  const SimConfig& cfg_;
  boost::random::discrete_distribution<std::uint32_t, double> offspring_;
  std::optional<ExcursionSampler> sampler_;
};

struct IntervalSink {
  static constexpr bool kIntervals = true;
  std::vector<std::pair<double, double>> intervals;
  void probe(std::size_t, std::int64_t) {}
  void interval(double a, double b) {
    if (b > a) intervals.emplace_back(a, b);
  }
};

struct ProbeSink {
  static constexpr bool kIntervals = false;
  std::vector<std::int64_t> values;
  void probe(std::size_t i, std::int64_t mu) { values[i] = mu; }
  void interval(double, double) {}
};

long double as_ld(__int128 v) { return static_cast<long double>(v); }

McEstimate sample_mean(long double sum, long double sum_sq, std::int64_t n, std::uint64_t seed) {
  McEstimate e;
  e.replicates = n;
  e.seed = seed;
  if (n == 0) return e;
  const long double mean = sum / n;
  e.value = static_cast<double>(mean);
  if (n > 1) {
    const long double var = std::max<long double>(0.0L, (sum_sq - n * mean * mean) / (n - 1));
    e.std_error = static_cast<double>(std::sqrt(var / n));
  }
  return e;
}

}  // namespace

void validate(const SimConfig& cfg) {
  if (!(cfg.window > 0.0)) throw InputError("simulation window must be positive");
  if (cfg.replicates < 1) throw InputError("replicates must be positive");
  if (!(cfg.alpha > 0.0 && cfg.alpha <= 1.0)) throw InputError("alpha must lie in (0,1]");
  if (cfg.explosion_cap < 1) throw InputError("explosion cap must be positive");
  for (std::size_t i = 0; i < cfg.probes.size(); ++i) {
    if (!(cfg.probes[i] >= 0.0 && cfg.probes[i] <= cfg.window)) throw InputError("probe times must lie in [0, window]");
    if (i && cfg.probes[i] < cfg.probes[i - 1]) throw InputError("probe times must be sorted");
  }
  if (cfg.mode == ExcursionMode::Tabulated) {
    if (!cfg.g2) throw InputError("tabulated mode needs a return-time table");
    if (!(cfg.h >= 0.0 && cfg.h < 1.0)) throw InputError("escape probability must lie in [0,1)");
    if (!cfg.g2->covers(cfg.window)) throw GridCoverageError("return-time table does not cover the window");
  } else {
    if (!cfg.walk) throw InputError("spatial mode needs a walk");
    if (cfg.walk->dimension() <= 2) throw UnsupportedDimensionError("spatial mode requires d >= 3");
  }
  if (cfg.enforce_criticality && cfg.alpha < 1.0) {
    if (cfg.mode == ExcursionMode::Spatial && cfg.h <= 0.0)
      throw InputError("criticality check needs the escape probability; set h or disable enforcement");
    const double mass = cfg.alpha * cfg.offspring.mean() + (1.0 - cfg.alpha) * (1.0 - cfg.h);
    if (std::abs(mass - 1.0) > cfg.criticality_tol)
      throw CriticalityError("simulation model is not critical (mass " + std::to_string(mass) + ")");
  } else if (cfg.enforce_criticality && std::abs(cfg.offspring.mean() - 1.0) > cfg.criticality_tol) {
    throw CriticalityError("alpha = 1 requires mean offspring 1");
  }
}

OriginOccupancy simulate_replicate(const SimConfig& cfg, std::int64_t replicate_index) {
  validate(cfg);
  const Engine engine(cfg);
  std::vector<Event> heap;
  IntervalSink sink;
  OriginOccupancy occ;
  occ.exploded = !engine.run(replicate_index, sink, heap);
  occ.intervals = std::move(sink.intervals);
  std::sort(occ.intervals.begin(), occ.intervals.end());
  return occ;
}

void ProbeTally::add(std::int64_t mu) {
  const __int128 m = mu;
  sum += mu;
  sum_sq += m * m;
  const __int128 f2 = m * (m - 1);
  sum_fact2 += f2;
  sum_fact2_sq += f2 * f2;
  if (mu > 0) {
    ++survivors;
    ++histogram[mu];
  }
}

void ProbeTally::merge(const ProbeTally& o) {
  survivors += o.survivors;
  sum += o.sum;
  sum_sq += o.sum_sq;
  sum_fact2 += o.sum_fact2;
  sum_fact2_sq += o.sum_fact2_sq;
  for (const auto& [k, v] : o.histogram) histogram[k] += v;
}

McEstimate SimulationResult::survival(std::size_t i) const {
  McEstimate e;
  e.replicates = replicates;
  e.seed = seed;
  if (replicates == 0) return e;
  e.value = static_cast<double>(tallies[i].survivors) / static_cast<double>(replicates);
  e.std_error = std::sqrt(e.value * (1.0 - e.value) / static_cast<double>(replicates));
  return e;
}

McEstimate SimulationResult::mean(std::size_t i) const {
  return sample_mean(static_cast<long double>(tallies[i].sum), as_ld(tallies[i].sum_sq), replicates, seed);
}

McEstimate SimulationResult::factorial2(std::size_t i) const {
  return sample_mean(as_ld(tallies[i].sum_fact2), as_ld(tallies[i].sum_fact2_sq), replicates, seed);
}

SimulationResult run_simulation(const SimConfig& cfg) {
  validate(cfg);
  const Engine engine(cfg);
  const std::size_t np = cfg.probes.size();
  struct Part {
    std::vector<ProbeTally> tallies;
    std::int64_t done = 0;
    std::int64_t exploded = 0;
  };
  Part total = run_chunked(
      cfg.replicates, cfg.threads, [&] { return Part{std::vector<ProbeTally>(np), 0, 0}; },
      [&](Part& part, std::int64_t begin, std::int64_t end) {
        std::vector<Event> heap;
        ProbeSink sink;
        sink.values.assign(np, 0);
        for (std::int64_t r = begin; r < end; ++r) {
          if (!engine.run(r, sink, heap)) {
            ++part.exploded;
            continue;
          }
          ++part.done;
          for (std::size_t i = 0; i < np; ++i) part.tallies[i].add(sink.values[i]);
        }
      },
      [](Part& acc, const Part& p) {
        acc.done += p.done;
        acc.exploded += p.exploded;
        for (std::size_t i = 0; i < acc.tallies.size(); ++i) acc.tallies[i].merge(p.tallies[i]);
      });
  SimulationResult res;
  res.probes = cfg.probes;
  res.tallies = std::move(total.tallies);
  res.replicates = total.done;
  res.exploded = total.exploded;
  res.seed = cfg.seed;
  return res;
}

std::vector<McEstimate> estimate_survival(const SimConfig& cfg) {
  if (cfg.replicates < 100) throw InputError("survival estimation needs at least 100 replicates");
  const SimulationResult res = run_simulation(cfg);
  std::vector<McEstimate> out;
  for (std::size_t i = 0; i < res.probes.size(); ++i) out.push_back(res.survival(i));
  return out;
}

double yaglom_ks_distance(const std::vector<std::pair<std::int64_t, std::int64_t>>& histogram, double x_min) {
  long double total = 0.0L;
  long double weighted = 0.0L;
  for (const auto& [mu, count] : histogram) {
    total += count;
    weighted += static_cast<long double>(mu) * count;
  }
  if (total == 0.0L) throw InsufficientSurvivorsError("empty survivor histogram");
  const double mean = static_cast<double>(weighted / total);
  // F is a step function and the mixture CDF is increasing, so the sup is
  // attained at x_min or at an atom, from the left or the right.
  long double cum = 0.0L;
  auto below = histogram.begin();
  for (; below != histogram.end() && static_cast<double>(below->first) / mean < x_min; ++below) cum += below->second;
  double sup = std::abs(static_cast<double>(cum / total) - yaglom_cdf(x_min));
  for (auto it = below; it != histogram.end(); ++it) {
    const double y = yaglom_cdf(static_cast<double>(it->first) / mean);
    sup = std::max(sup, std::abs(static_cast<double>(cum / total) - y));
    cum += it->second;
    sup = std::max(sup, std::abs(static_cast<double>(cum / total) - y));
  }
  return sup;
}

ConditionalLaw conditional_law(const SimulationResult& res, std::size_t probe, std::int64_t min_survivors) {
  const ProbeTally& t = res.tallies.at(probe);
  if (t.survivors < min_survivors)
    throw InsufficientSurvivorsError("only " + std::to_string(t.survivors) + " survivors at t=" +
                                     std::to_string(res.probes[probe]) + " (need " + std::to_string(min_survivors) +
                                     ")");
  ConditionalLaw law;
  law.t = res.probes[probe];
  law.survivors = t.survivors;
  law.histogram.assign(t.histogram.begin(), t.histogram.end());
  law.conditional_mean = static_cast<double>(t.sum) / static_cast<double>(t.survivors);
  law.ks_distance = yaglom_ks_distance(law.histogram);
  return law;
}

ConditionalLaw conditional_law(const SimConfig& cfg, double t, std::int64_t min_survivors) {
  SimConfig one = cfg;
  one.probes = {t};
  return conditional_law(run_simulation(one), 0, min_survivors);
}

}  // namespace catbrw
