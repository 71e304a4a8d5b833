#include "rankneat/neat.hpp"

#include "parallel.hpp"
#include "rankneat/error.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <numeric>
#include <ostream>
#include <set>
#include <unordered_map>

namespace rankneat {

namespace {

void check_rate(double value, const char* name) {
    if (!(value >= 0.0 && value <= 1.0)) {
        throw Error(ErrorKind::InvalidArgument, fmt::format("{} must lie in [0,1], got {}", name, value));
    }
}

bool fitter(const Genome& a, const Genome& b) {
    if (*a.fitness != *b.fitness) return *a.fitness > *b.fitness;
    return a.id < b.id;
}

}  // namespace

void NeatConfig::validate() const {
    if (population_size < 2) {
        throw Error(ErrorKind::InvalidArgument, "population size must be at least 2");
    }
    if (!(compatibility_threshold > 0.0)) {
        throw Error(ErrorKind::InvalidArgument, "compatibility threshold must be positive");
    }
    if (node_mutation_rate != 0.0) {
        throw Error(ErrorKind::InvalidArgument,
                    "node mutations are not supported; node_mutation_rate must be 0");
    }
    check_rate(edge_add_rate, "edge_add_rate");
    check_rate(edge_delete_rate, "edge_delete_rate");
    check_rate(weight_mutation_rate, "weight_mutation_rate");
    check_rate(weight_replace_rate, "weight_replace_rate");
    check_rate(crossover_rate, "crossover_rate");
    if (!(survival_threshold > 0.0 && survival_threshold <= 1.0)) {
        throw Error(ErrorKind::InvalidArgument, "survival_threshold must lie in (0,1]");
    }
    if (!(weight_perturb_std >= 0.0)) {
        throw Error(ErrorKind::InvalidArgument, "weight_perturb_std must be non-negative");
    }
    if (stagnation_limit == 0) {
        throw Error(ErrorKind::InvalidArgument, "stagnation_limit must be positive");
    }
    if (eval_threads == 0) {
        throw Error(ErrorKind::InvalidArgument, "eval_threads must be positive");
    }
}

// ---------------------------------------------------------------------------
// Genome / Population
// ---------------------------------------------------------------------------

std::size_t Genome::enabled_count() const {
    return static_cast<std::size_t>(
        std::count_if(genes.begin(), genes.end(), [](const auto& g) { return g.second.enabled; }));
}

LinearRanker Genome::decode() const {
    std::vector<LinearRanker::Entry> entries;
    entries.reserve(genes.size());
    for (const auto& [index, gene] : genes) {
        if (gene.enabled) entries.push_back({index, gene.weight});
    }
    return LinearRanker(dimension, std::move(entries));
}

const Genome& Population::champion() const {
    if (genomes.empty()) throw Error(ErrorKind::ExtinctPopulation, "population is empty");
    const Genome* best = &genomes.front();
    for (const auto& g : genomes) {
        if (!g.fitness) throw Error(ErrorKind::InvalidArgument, "genome fitness not evaluated");
        if (*g.fitness > *best->fitness) best = &g;
    }
    return *best;
}

Population init_population(const NeatConfig& config, std::size_t dimension, Rng& rng) {
    config.validate();
    if (dimension == 0) throw Error(ErrorKind::InvalidArgument, "dimension must be positive");
    std::normal_distribution<double> normal(0.0, 1.0);
    Population population;
    population.dimension = dimension;
    population.genomes.reserve(config.population_size);
    for (std::size_t i = 0; i < config.population_size; ++i) {
        Genome genome{population.next_genome_id++, dimension, {}, std::nullopt};
        for (std::size_t k = 0; k < dimension; ++k) genome.genes.emplace(k, EdgeGene{normal(rng), true});
        population.genomes.push_back(std::move(genome));
    }
    population.species = speciate(population.genomes, {}, config.compatibility_threshold,
                                  config.compatibility, population.next_species_id);
    return population;
}

double fitness(const Genome& genome, const PairDataset& training) {
    return -evaluate_pairs(genome.decode(), training).mean_loss;
}

void evaluate_population(Population& population, const PairDataset& training,
                         std::size_t threads) {
    if (training.empty()) throw Error(ErrorKind::EmptyDataset, "training set has no pairs");
    detail::parallel_for(population.genomes.size(), threads, [&](std::size_t i) {
        auto& genome = population.genomes[i];
        if (!genome.fitness) genome.fitness = fitness(genome, training);
    });

    std::unordered_map<std::uint64_t, double> fitness_of;
    for (const auto& g : population.genomes) fitness_of.emplace(g.id, *g.fitness);
    for (auto& species : population.species) {
        double best = -std::numeric_limits<double>::infinity();
        for (auto id : species.members) best = std::max(best, fitness_of.at(id));
        const auto& history = species.best_fitness_history;
        if (history.empty() || best > *std::max_element(history.begin(), history.end())) {
            species.stagnation_counter = 0;
        } else {
            ++species.stagnation_counter;
        }
        species.best_fitness_history.push_back(best);
    }
}

// ---------------------------------------------------------------------------
// Speciation
// ---------------------------------------------------------------------------

double compatibility_distance(const Genome& a, const Genome& b,
                              const CompatibilityCoefficients& coefficients) {
    std::size_t disjoint = 0;
    std::size_t shared = 0;
    double weight_difference = 0.0;
    auto ia = a.genes.begin();
    auto ib = b.genes.begin();
    while (ia != a.genes.end() || ib != b.genes.end()) {
        if (ib == b.genes.end() || (ia != a.genes.end() && ia->first < ib->first)) {
            ++disjoint;
            ++ia;
        } else if (ia == a.genes.end() || ib->first < ia->first) {
            ++disjoint;
            ++ib;
        } else {
            ++shared;
            weight_difference += std::abs(ia->second.weight - ib->second.weight);
            ++ia;
            ++ib;
        }
    }
    const auto n = std::max<std::size_t>({a.genes.size(), b.genes.size(), 1});
    double distance = coefficients.disjoint * static_cast<double>(disjoint) / static_cast<double>(n);
    if (shared > 0) distance += coefficients.weight * weight_difference / static_cast<double>(shared);
    return distance;
}

std::vector<Species> speciate(const std::vector<Genome>& genomes,
                              const std::vector<Species>& previous, double threshold,
                              const CompatibilityCoefficients& coefficients,
                              std::uint64_t& next_species_id) {
    std::vector<Species> species = previous;
    for (auto& s : species) s.members.clear();
    const auto carried = species.size();

    for (const auto& genome : genomes) {
        auto home = std::find_if(species.begin(), species.end(), [&](const Species& s) {
            return compatibility_distance(s.representative, genome, coefficients) < threshold;
        });
        if (home != species.end()) {
            home->members.push_back(genome.id);
        } else {
            species.push_back(Species{next_species_id++, genome, {genome.id}, {}, 0});
        }
    }

    // A surviving species is represented next time by its member closest to
    // the old representative.
    std::unordered_map<std::uint64_t, const Genome*> by_id;
    for (const auto& g : genomes) by_id.emplace(g.id, &g);
    for (std::size_t i = 0; i < carried; ++i) {
        auto& s = species[i];
        if (s.members.empty()) continue;
        const Genome* closest = nullptr;
        double closest_distance = std::numeric_limits<double>::infinity();
        for (auto id : s.members) {
            const auto* g = by_id.at(id);
            const double d = compatibility_distance(s.representative, *g, coefficients);
            if (d < closest_distance) {
                closest_distance = d;
                closest = g;
            }
        }
        s.representative = *closest;
    }

    std::erase_if(species, [](const Species& s) { return s.members.empty(); });
    return species;
}

// ---------------------------------------------------------------------------
// Variation
// ---------------------------------------------------------------------------

Genome mutate(const Genome& genome, const NeatConfig& config, Rng& rng) {
    Genome child = genome;
    child.fitness.reset();
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> fresh(0.0, 1.0);

    if (unit(rng) < config.edge_add_rate) {
        std::vector<std::size_t> candidates;
        for (std::size_t k = 0; k < child.dimension; ++k) {
            const auto it = child.genes.find(k);
            if (it == child.genes.end() || !it->second.enabled) candidates.push_back(k);
        }
        if (!candidates.empty()) {
            std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
            child.genes[candidates[pick(rng)]] = EdgeGene{fresh(rng), true};
        }
    }

    if (unit(rng) < config.edge_delete_rate && !child.genes.empty()) {
        std::uniform_int_distribution<std::size_t> pick(0, child.genes.size() - 1);
        child.genes.erase(std::next(child.genes.begin(), static_cast<std::ptrdiff_t>(pick(rng))));
    }

    for (auto& [index, gene] : child.genes) {
        const double r = unit(rng);
        if (r < config.weight_mutation_rate) {
            if (config.weight_perturb_std > 0.0) gene.weight += config.weight_perturb_std * fresh(rng);
        } else if (r < config.weight_mutation_rate + config.weight_replace_rate) {
            gene.weight = fresh(rng);
        }
    }
    return child;
}

Genome crossover(const Genome& parent_a, const Genome& parent_b, Rng& rng) {
    if (!parent_a.fitness || !parent_b.fitness) {
        throw Error(ErrorKind::InvalidArgument, "crossover needs evaluated parents");
    }
    if (parent_a.dimension != parent_b.dimension) {
        throw Error(ErrorKind::DimensionMismatch, "parents have different dimensions");
    }
    const bool tie = *parent_a.fitness == *parent_b.fitness;
    const bool a_fitter = *parent_a.fitness > *parent_b.fitness;
    std::bernoulli_distribution coin(0.5);

    Genome child{0, parent_a.dimension, {}, std::nullopt};
    for (const auto& [index, gene] : parent_a.genes) {
        const auto other = parent_b.genes.find(index);
        if (other != parent_b.genes.end()) {
            child.genes.emplace(index, coin(rng) ? gene : other->second);
        } else if (a_fitter || tie) {
            child.genes.emplace(index, gene);
        }
    }
    if (!a_fitter || tie) {
        for (const auto& [index, gene] : parent_b.genes) {
            if (!parent_a.genes.contains(index)) child.genes.emplace(index, gene);
        }
    }
    return child;
}

// ---------------------------------------------------------------------------
// Reproduction
// ---------------------------------------------------------------------------

Population next_generation(const Population& population, const PairDataset& training,
                           const NeatConfig& config, Rng& rng) {
    config.validate();
    const auto& champion = population.champion();
    const std::size_t p = config.population_size;

    std::unordered_map<std::uint64_t, const Genome*> by_id;
    double min_fitness = std::numeric_limits<double>::infinity();
    for (const auto& g : population.genomes) {
        by_id.emplace(g.id, &g);
        min_fitness = std::min(min_fitness, *g.fitness);
    }

    struct Plan {
        const Species* species;
        std::vector<const Genome*> ranked;
        std::size_t elites = 0;
        std::size_t offspring = 0;
        double share = 0.0;
    };
    std::vector<Plan> plans;
    for (const auto& s : population.species) {
        const bool has_champion =
            std::find(s.members.begin(), s.members.end(), champion.id) != s.members.end();
        if (s.stagnation_counter >= config.stagnation_limit && !has_champion) continue;
        Plan plan{&s, {}, 0, 0, 0.0};
        for (auto id : s.members) plan.ranked.push_back(by_id.at(id));
        std::sort(plan.ranked.begin(), plan.ranked.end(),
                  [](const Genome* a, const Genome* b) { return fitter(*a, *b); });
        double mean = 0.0;
        for (const auto* g : plan.ranked) mean += *g->fitness;
        mean /= static_cast<double>(plan.ranked.size());
        plan.share = mean - min_fitness + 1e-6;
        plans.push_back(std::move(plan));
    }
    if (plans.empty()) throw Error(ErrorKind::ExtinctPopulation, "every species stagnated");

    // Elite slots go to the strongest species first when they cannot all fit.
    std::vector<std::size_t> by_strength(plans.size());
    std::iota(by_strength.begin(), by_strength.end(), std::size_t{0});
    std::stable_sort(by_strength.begin(), by_strength.end(), [&](std::size_t a, std::size_t b) {
        return fitter(*plans[a].ranked.front(), *plans[b].ranked.front());
    });
    std::size_t remaining = p;
    for (auto i : by_strength) {
        plans[i].elites = std::min({config.elitism_per_species, plans[i].ranked.size(), remaining});
        remaining -= plans[i].elites;
    }

    // Largest-remainder apportionment of the offspring slots.
    double total_share = 0.0;
    for (const auto& plan : plans) total_share += plan.share;
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < plans.size(); ++i) {
        const double exact = static_cast<double>(remaining) * plans[i].share / total_share;
        plans[i].offspring = static_cast<std::size_t>(std::floor(exact));
        assigned += plans[i].offspring;
        remainders.emplace_back(exact - std::floor(exact), i);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t k = 0; assigned < remaining; ++k, ++assigned) {
        ++plans[remainders[k % remainders.size()].second].offspring;
    }

    Population next;
    next.dimension = population.dimension;
    next.generation = population.generation + 1;
    next.next_genome_id = population.next_genome_id;
    next.next_species_id = population.next_species_id;
    next.genomes.reserve(p);

    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (const auto& plan : plans) {
        for (std::size_t e = 0; e < plan.elites; ++e) next.genomes.push_back(*plan.ranked[e]);
    }
    for (const auto& plan : plans) {
        const auto survivors = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::ceil(config.survival_threshold *
                                                  static_cast<double>(plan.ranked.size()))));
        std::uniform_int_distribution<std::size_t> pick(0, survivors - 1);
        for (std::size_t o = 0; o < plan.offspring; ++o) {
            const Genome& a = *plan.ranked[pick(rng)];
            const Genome& b = *plan.ranked[pick(rng)];
            Genome child = unit(rng) < config.crossover_rate ? crossover(a, b, rng) : a;
            child = mutate(child, config, rng);
            child.id = next.next_genome_id++;
            next.genomes.push_back(std::move(child));
        }
    }

    std::vector<Species> carried;
    for (const auto& plan : plans) carried.push_back(*plan.species);
    next.species = speciate(next.genomes, carried, config.compatibility_threshold,
                            config.compatibility, next.next_species_id);
    evaluate_population(next, training, config.eval_threads);
    return next;
}

// ---------------------------------------------------------------------------
// Evolution loop
// ---------------------------------------------------------------------------

std::size_t generations_for_budget(std::size_t budget, std::size_t population_size) {
    if (budget == 0 || population_size == 0) {
        throw Error(ErrorKind::InvalidArgument, "budget and population size must be positive");
    }
    return (budget + population_size - 1) / population_size;
}

EvolutionResult evolve(const PairDataset& training, const PairDataset& test,
                       const NeatConfig& config, std::size_t budget) {
    config.validate();
    if (training.empty()) throw Error(ErrorKind::EmptyDataset, "training set has no pairs");
    const auto generations = generations_for_budget(budget, config.population_size);

    Rng rng(config.seed);
    auto population = init_population(config, training.dimension(), rng);
    evaluate_population(population, training, config.eval_threads);

    EvolutionResult result;
    for (std::size_t g = 1; g <= generations; ++g) {
        const Genome& champion = population.champion();
        const auto ranker = champion.decode();
        const auto on_train = evaluate_pairs(ranker, training);
        const double test_accuracy = pair_accuracy(ranker, test);
        const std::size_t iteration = g * config.population_size;

        double genes = 0.0;
        for (const auto& genome : population.genomes) genes += static_cast<double>(genome.gene_count());

        result.trajectory.records.push_back(
            {iteration, on_train.accuracy, test_accuracy, -*champion.fitness});
        result.generations.push_back({g, iteration, *champion.fitness, on_train.accuracy,
                                      test_accuracy, population.species.size(),
                                      genes / static_cast<double>(population.genomes.size())});
        result.checkpoints.push_back({g, *champion.fitness, ranker});
        if (!result.champion.fitness || *champion.fitness > *result.champion.fitness) {
            result.champion = champion;
        }
        if (g < generations) population = next_generation(population, training, config, rng);
    }
    return result;
}

void write_evolution_csv(std::ostream& out, const std::vector<GenerationRecord>& records) {
    out << "generation,iteration,champion_fitness,champion_train_acc,champion_test_acc,"
           "species_count,mean_gene_count\n";
    for (const auto& r : records) {
        out << fmt::format("{},{},{},{},{},{},{}\n", r.generation, r.iteration, r.champion_fitness,
                           r.champion_train_accuracy, r.champion_test_accuracy, r.species_count,
                           r.mean_gene_count);
    }
}

nlohmann::json to_json(const ChampionCheckpoint& checkpoint) {
    auto json = to_json(checkpoint.ranker);
    json["generation"] = checkpoint.generation;
    json["fitness"] = checkpoint.fitness;
    json["gene_count"] = checkpoint.ranker.size();
    return json;
}

}  // namespace rankneat
