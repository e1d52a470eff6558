#include "thermodiag/ga.hpp"

#include "parallel.hpp"
#include "thermodiag/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace thermodiag::ga {

Chromosome Chromosome::from_string(const std::string& text) {
  Chromosome c;
  for (char ch : text) {
    if (std::isspace(static_cast<unsigned char>(ch))) continue;
    if (ch != '0' && ch != '1') throw std::invalid_argument("chromosome string may only contain 0, 1 and spaces");
    c.bits.push_back(ch == '1');
  }
  return c;
}

std::string Chromosome::to_string() const {
  std::string s;
  s.reserve(bits.size());
  for (bool b : bits) s.push_back(b ? '1' : '0');
  return s;
}

int Chromosome::popcount() const { return static_cast<int>(std::count(bits.begin(), bits.end(), true)); }

bool better(double ja, const Chromosome& a, double jb, const Chromosome& b) {
  if (ja < kZeroObjective) ja = 0.0;
  if (jb < kZeroObjective) jb = 0.0;
  if (ja != jb) return ja < jb;
  const int pa = a.popcount(), pb = b.popcount();
  if (pa != pb) return pa < pb;
  // '0' < '1', so plain lexicographic order on the bits.
  return a.bits < b.bits;
}

ForcingSet decode(const Chromosome& c) {
  ForcingSet s;
  for (std::size_t k = 0; k < c.bits.size(); ++k)
    if (c.bits[k]) s.insert(static_cast<NodeId>(k) + 1);
  return s;
}

Chromosome encode(const ForcingSet& s, std::size_t length) {
  Chromosome c(length);
  for (NodeId id : s) {
    if (id < 1 || static_cast<std::size_t>(id) > length)
      throw ModelError(fmt::format("node {} does not fit a chromosome of length {}", id, length));
    c.bits[id - 1] = true;
  }
  return c;
}

double fitness(double objective) {
  if (!(objective >= 0.0)) throw std::domain_error(fmt::format("objective must be >= 0 (got {})", objective));
  return 1.0 / (1.0 + objective);
}

void GAConfig::validate() const {
  if (population_size < 2 || population_size % 2 != 0)
    throw ModelError(fmt::format("population size must be even and >= 2 (got {})", population_size));
  if (!(crossover_probability >= 0.0 && crossover_probability <= 1.0))
    throw ModelError("crossover probability must be in [0,1]");
  if (!(mutation_probability >= 0.0 && mutation_probability <= 1.0))
    throw ModelError("mutation probability must be in [0,1]");
  if (max_generations < 0) throw ModelError("max generations must be >= 0");
  if (measurable_mask.empty()) throw ModelError("measurable mask is empty (chromosome length 0)");
  if (stagnation_window < 1) throw ModelError("stagnation window must be >= 1");
  if (threads < 1) throw ModelError("threads must be >= 1");
}

const ScoredIndividual& select_roulette(const std::vector<ScoredIndividual>& population, Rng& rng) {
  if (population.empty()) throw std::invalid_argument("roulette selection on an empty population");
  double total = 0.0;
  for (const auto& s : population) {
    if (!(s.fitness > 0.0)) throw std::invalid_argument("roulette selection needs strictly positive fitness");
    total += s.fitness;
  }
  const double target = rng.uniform() * total;
  double cumulative = 0.0;
  for (const auto& s : population) {
    cumulative += s.fitness;
    if (target < cumulative) return s;
  }
  return population.back();
}

std::pair<Chromosome, Chromosome> crossover_at(const Chromosome& p1, const Chromosome& p2, std::size_t cut) {
  if (p1.size() != p2.size()) throw std::invalid_argument("crossover of chromosomes with different lengths");
  if (cut > p1.size()) throw std::invalid_argument("crossover cut beyond chromosome length");
  Chromosome c1 = p1, c2 = p2;
  for (std::size_t k = cut; k < p1.size(); ++k) {
    c1.bits[k] = p2.bits[k];
    c2.bits[k] = p1.bits[k];
  }
  return {std::move(c1), std::move(c2)};
}

std::pair<Chromosome, Chromosome> crossover(const Chromosome& p1, const Chromosome& p2, double pc, Rng& rng) {
  if (p1.size() != p2.size()) throw std::invalid_argument("crossover of chromosomes with different lengths");
  if (rng.uniform() >= pc || p1.size() < 2) return {p1, p2};
  const auto cut = static_cast<std::size_t>(rng.uniform_int(1, static_cast<int>(p1.size()) - 1));
  return crossover_at(p1, p2, cut);
}

Chromosome mutate(const Chromosome& c, double pm, Rng& rng, const std::vector<bool>& measurable_mask) {
  if (measurable_mask.size() != c.size()) throw std::invalid_argument("mask length differs from chromosome length");
  Chromosome out = c;
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (!measurable_mask[k]) {
      out.bits[k] = false;
      continue;
    }
    if (rng.uniform() < pm) out.bits[k] = !out.bits[k];
  }
  return out;
}

std::vector<ScoredIndividual> evolve(const std::vector<ScoredIndividual>& population, const GAConfig& config,
                                     Rng& rng, const BatchScorer& score) {
  std::vector<ScoredIndividual> children;
  children.reserve(population.size());
  while (children.size() < population.size()) {
    const auto& a = select_roulette(population, rng);
    const auto& b = select_roulette(population, rng);
    auto [c1, c2] = crossover(a.chromosome, b.chromosome, config.crossover_probability, rng);
    c1 = mutate(c1, config.mutation_probability, rng, config.measurable_mask);
    c2 = mutate(c2, config.mutation_probability, rng, config.measurable_mask);
    children.push_back({std::move(c1), 0.0, 0.0});
    if (children.size() < population.size()) children.push_back({std::move(c2), 0.0, 0.0});
  }
  score(children);

  if (config.elitism && !population.empty()) {
    auto by_rank = [](const ScoredIndividual& x, const ScoredIndividual& y) {
      return better(x.objective, x.chromosome, y.objective, y.chromosome);
    };
    const auto best_parent = std::min_element(population.begin(), population.end(), by_rank);
    const auto worst_child = std::max_element(children.begin(), children.end(), by_rank);
    *worst_child = *best_parent;
  }
  return children;
}

namespace {

struct VectorBoolHash {
  std::size_t operator()(const std::vector<bool>& v) const { return std::hash<std::vector<bool>>{}(v); }
};

class MemoScorer {
 public:
  MemoScorer(const Evaluator& evaluator, int threads) : evaluator_(evaluator), threads_(threads) {}

  void operator()(std::vector<ScoredIndividual>& batch) {
    std::vector<const Chromosome*> pending;
    {
      std::unordered_map<std::vector<bool>, int, VectorBoolHash> queued;
      for (const auto& s : batch)
        if (!cache_.count(s.chromosome.bits) && queued.emplace(s.chromosome.bits, 0).second)
          pending.push_back(&s.chromosome);
    }
    std::vector<double> results(pending.size(), 0.0);
    detail::parallel_for(pending.size(), threads_, [&](std::size_t k) {
      try {
        results[k] = evaluator_(*pending[k]);
      } catch (const std::exception& e) {
        throw std::runtime_error(
            fmt::format("evaluation of chromosome {} failed: {}", pending[k]->to_string(), e.what()));
      }
    });
    for (std::size_t k = 0; k < pending.size(); ++k) {
      if (!(results[k] >= 0.0))
        throw std::runtime_error(
            fmt::format("evaluation of chromosome {} returned invalid objective {}", pending[k]->to_string(), results[k]));
      cache_.emplace(pending[k]->bits, results[k]);
    }
    for (auto& s : batch) {
      s.objective = cache_.at(s.chromosome.bits);
      s.fitness = fitness(s.objective);
    }
  }

  std::size_t evaluations() const { return cache_.size(); }

 private:
  const Evaluator& evaluator_;
  int threads_;
  std::unordered_map<std::vector<bool>, double, VectorBoolHash> cache_;
};

GenerationRecord summarize(int generation, const std::vector<ScoredIndividual>& population) {
  GenerationRecord rec;
  rec.generation = generation;
  const ScoredIndividual* best = &population.front();
  double sum = 0.0;
  for (const auto& s : population) {
    sum += s.fitness;
    if (better(s.objective, s.chromosome, best->objective, best->chromosome)) best = &s;
  }
  rec.best = *best;
  rec.best_fitness = best->fitness;
  rec.mean_fitness = sum / static_cast<double>(population.size());
  return rec;
}

}  // namespace

std::pair<ScoredIndividual, GAHistory> run_ga(const GAConfig& config, const Evaluator& evaluator) {
  config.validate();
  Rng rng(config.seed);
  MemoScorer score(evaluator, config.threads);
  const std::size_t length = config.measurable_mask.size();

  std::vector<ScoredIndividual> population(config.population_size);
  for (auto& s : population) {
    s.chromosome = Chromosome(length);
    for (std::size_t k = 0; k < length; ++k)
      if (config.measurable_mask[k]) s.chromosome.bits[k] = rng.uniform() < 0.5;
  }
  score(population);

  GAHistory history;
  history.generations.push_back(summarize(0, population));
  ScoredIndividual best = history.generations.back().best;
  double reference = best.objective;  // last best J that counted as progress
  int stale = 0;

  for (int g = 1; g <= config.max_generations; ++g) {
    population = evolve(population, config, rng, std::ref(score));
    history.generations.push_back(summarize(g, population));
    const auto& gen_best = history.generations.back().best;
    if (better(gen_best.objective, gen_best.chromosome, best.objective, best.chromosome)) best = gen_best;
    if (reference - best.objective > config.stagnation_tolerance) {
      reference = best.objective;
      stale = 0;
    } else if (++stale >= config.stagnation_window) {
      history.stagnated = true;
      break;
    }
  }
  history.evaluations = score.evaluations();
  return {best, history};
}

}  // namespace thermodiag::ga
