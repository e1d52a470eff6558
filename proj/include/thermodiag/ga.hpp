#pragma once

// Binary-chromosome genetic algorithm: roulette-wheel reproduction,
// single-point crossover, per-bit mutation, optional elitism.
//
// All operator randomness comes from one Rng stream consumed in a fixed order
// per pair of children: select parent 1, select parent 2, crossover decision,
// cut point (only when crossing), then one draw per maskable locus of child 1
// followed by child 2. Objective evaluation never touches the stream.

#include "thermodiag/simulate.hpp"

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace thermodiag::ga {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0,1) from exactly one engine draw.
  double uniform() {
    ++draws_;
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }
  /// Uniform integer in [lo, hi] from exactly one engine draw.
  int uniform_int(int lo, int hi) {
    const int k = lo + static_cast<int>(uniform() * static_cast<double>(hi - lo + 1));
    return k > hi ? hi : k;
  }
  std::uint64_t draws() const { return draws_; }

 private:
  std::mt19937_64 engine_;
  std::uint64_t draws_ = 0;
};

/// Locus k (0-based) selects node k + 1.
struct Chromosome {
  std::vector<bool> bits;

  Chromosome() = default;
  explicit Chromosome(std::size_t length) : bits(length, false) {}

  /// Parses "1000 0000 1000"; whitespace is ignored.
  static Chromosome from_string(const std::string& text);
  std::string to_string() const;

  std::size_t size() const { return bits.size(); }
  int popcount() const;
  bool operator==(const Chromosome&) const = default;
};

/// Objectives below this (degC^2) are roundoff around exact agreement and
/// rank as equal.
constexpr double kZeroObjective = 1e-18;

/// Strict ordering used to pick "the best": lower J, then fewer set bits,
/// then the lexicographically smaller bit string.
bool better(double ja, const Chromosome& a, double jb, const Chromosome& b);

ForcingSet decode(const Chromosome& c);
Chromosome encode(const ForcingSet& s, std::size_t length);

/// f = 1 / (1 + J).
double fitness(double objective);

struct ScoredIndividual {
  Chromosome chromosome;
  double objective = 0.0;  // J
  double fitness = 1.0;
};

struct GAConfig {
  int population_size = 30;
  double crossover_probability = 0.8;
  double mutation_probability = 0.03;
  int max_generations = 400;
  std::uint64_t seed = 1;
  bool elitism = true;
  std::vector<bool> measurable_mask;  // length L; true = forceable locus
  int stagnation_window = 50;
  double stagnation_tolerance = 1e-12;
  int threads = 1;  // evaluator parallelism; results do not depend on it

  void validate() const;
};

struct GenerationRecord {
  int generation = 0;
  double best_fitness = 0.0;
  double mean_fitness = 0.0;
  ScoredIndividual best;
};

struct GAHistory {
  std::vector<GenerationRecord> generations;
  std::size_t evaluations = 0;  // distinct chromosomes evaluated
  bool stagnated = false;

  int generation_count() const { return static_cast<int>(generations.size()); }
};

using Evaluator = std::function<double(const Chromosome&)>;
/// Scores a batch in place (objective and fitness).
using BatchScorer = std::function<void(std::vector<ScoredIndividual>&)>;

const ScoredIndividual& select_roulette(const std::vector<ScoredIndividual>& population, Rng& rng);

std::pair<Chromosome, Chromosome> crossover(const Chromosome& p1, const Chromosome& p2, double pc, Rng& rng);
/// Cut at k: c1 = p1[0..k) ++ p2[k..L), c2 the complement.
std::pair<Chromosome, Chromosome> crossover_at(const Chromosome& p1, const Chromosome& p2, std::size_t cut);

Chromosome mutate(const Chromosome& c, double pm, Rng& rng, const std::vector<bool>& measurable_mask);

/// One generation: roulette pairs, crossover, mutation, scoring, elitism.
std::vector<ScoredIndividual> evolve(const std::vector<ScoredIndividual>& population, const GAConfig& config,
                                     Rng& rng, const BatchScorer& score);

std::pair<ScoredIndividual, GAHistory> run_ga(const GAConfig& config, const Evaluator& evaluator);

}  // namespace thermodiag::ga
