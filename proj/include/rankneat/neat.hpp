#pragma once

#include "rankneat/dataset.hpp"
#include "rankneat/random.hpp"
#include "rankneat/ranker.hpp"
#include "rankneat/sgd.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <vector>

namespace rankneat {

// ---------------------------------------------------------------------------
// Genome
//
// Every edge connects one input to the single output node, so an edge is
// identified by its input index. That index doubles as the innovation number
// used to align genes during crossover.
// ---------------------------------------------------------------------------

struct EdgeGene {
    double weight = 0.0;
    bool enabled = true;

    bool operator==(const EdgeGene&) const = default;
};

struct Genome {
    std::uint64_t id = 0;
    std::size_t dimension = 0;
    std::map<std::size_t, EdgeGene> genes;  // keyed by input index
    std::optional<double> fitness;

    std::size_t gene_count() const noexcept { return genes.size(); }
    std::size_t enabled_count() const;

    /// Enabled genes become the ranker's weights.
    LinearRanker decode() const;

    bool operator==(const Genome&) const = default;
};

struct Species {
    std::uint64_t id = 0;
    Genome representative;
    std::vector<std::uint64_t> members;  // genome ids
    std::vector<double> best_fitness_history;
    std::size_t stagnation_counter = 0;

    bool operator==(const Species&) const = default;
};

struct CompatibilityCoefficients {
    double disjoint = 1.0;
    double weight = 0.5;

    bool operator==(const CompatibilityCoefficients&) const = default;
};

struct NeatConfig {
    std::size_t population_size = 100;
    double compatibility_threshold = 3.0;
    std::size_t elitism_per_species = 2;
    double node_mutation_rate = 0.0;  // hidden nodes are never added
    double edge_add_rate = 0.5;
    double edge_delete_rate = 0.5;
    double weight_mutation_rate = 0.8;
    double weight_perturb_std = 0.5;
    double weight_replace_rate = 0.1;
    double survival_threshold = 0.2;
    std::size_t stagnation_limit = 15;
    double crossover_rate = 0.75;
    CompatibilityCoefficients compatibility;
    std::uint64_t seed = 0;
    std::size_t eval_threads = 1;

    /// Throws InvalidArgument when a field is out of range.
    void validate() const;

    bool operator==(const NeatConfig&) const = default;
};

struct Population {
    std::size_t dimension = 0;
    std::vector<Genome> genomes;
    std::vector<Species> species;
    std::size_t generation = 0;
    std::uint64_t next_genome_id = 0;
    std::uint64_t next_species_id = 0;

    /// Highest fitness, ties to the earliest genome. Requires fitness set.
    const Genome& champion() const;

    bool operator==(const Population&) const = default;
};

// ---------------------------------------------------------------------------
// Operators
// ---------------------------------------------------------------------------

/// p fully connected genomes with N(0,1) weights, already speciated.
Population init_population(const NeatConfig& config, std::size_t dimension, Rng& rng);

/// Negative mean BCE of the decoded ranker over every training pair.
double fitness(const Genome& genome, const PairDataset& training);

/// Fills in missing fitness values (in parallel when `threads` > 1) and
/// refreshes each species' best-fitness history and stagnation counter.
void evaluate_population(Population& population, const PairDataset& training,
                         std::size_t threads = 1);

double compatibility_distance(const Genome& a, const Genome& b,
                              const CompatibilityCoefficients& coefficients = {});

/// Greedy assignment: each genome joins the first species whose
/// representative lies within the threshold, else founds a new species.
/// Species from `previous` keep their id, history and representative.
std::vector<Species> speciate(const std::vector<Genome>& genomes,
                              const std::vector<Species>& previous, double threshold,
                              const CompatibilityCoefficients& coefficients,
                              std::uint64_t& next_species_id);

Genome mutate(const Genome& genome, const NeatConfig& config, Rng& rng);

Genome crossover(const Genome& parent_a, const Genome& parent_b, Rng& rng);

/// Elites, fitness-shared offspring quotas and stagnation culling. The
/// returned population is evaluated on `training` and speciated.
Population next_generation(const Population& population, const PairDataset& training,
                           const NeatConfig& config, Rng& rng);

// ---------------------------------------------------------------------------
// Evolution loop
// ---------------------------------------------------------------------------

struct GenerationRecord {
    std::size_t generation = 0;  // 1-based
    std::size_t iteration = 0;   // generation * population_size
    double champion_fitness = 0.0;
    double champion_train_accuracy = 0.0;
    double champion_test_accuracy = 0.0;
    std::size_t species_count = 0;
    double mean_gene_count = 0.0;

    bool operator==(const GenerationRecord&) const = default;
};

struct ChampionCheckpoint {
    std::size_t generation = 0;
    double fitness = 0.0;
    LinearRanker ranker;

    bool operator==(const ChampionCheckpoint&) const = default;
};

struct EvolutionResult {
    TrainTrajectory trajectory;  // mean_loss = -champion fitness
    std::vector<GenerationRecord> generations;
    std::vector<ChampionCheckpoint> checkpoints;
    Genome champion;  // best training fitness seen
};

/// Number of generations whose evaluations cover `budget` iterations.
std::size_t generations_for_budget(std::size_t budget, std::size_t population_size);

EvolutionResult evolve(const PairDataset& training, const PairDataset& test,
                       const NeatConfig& config, std::size_t budget);

/// CSV `generation,iteration,champion_fitness,champion_train_acc,champion_test_acc,species_count,mean_gene_count`.
void write_evolution_csv(std::ostream& out, const std::vector<GenerationRecord>& records);

nlohmann::json to_json(const ChampionCheckpoint& checkpoint);

}  // namespace rankneat
