#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "marls/io.hpp"
#include "marls/mamdp.hpp"

namespace marls {

enum class GeneratorKind { RandomDirichlet, DeterministicChain, DroneGrid };
enum class OracleKind { Coverage, FacilityLocation, Modular };

struct GeneratorSpec {
    GeneratorKind kind = GeneratorKind::RandomDirichlet;
    int num_states = 2;
    int num_actions = 2;
    int num_agents = 2;
    int horizon = 2;
    OracleKind oracle = OracleKind::Coverage;
    int num_objects = 4;
    /// Probability that a pair covers a given object (random coverage oracles).
    double coverage_density = 0.4;
    /// Drone grid only; num_states becomes width * height and num_actions 5.
    int grid_width = 2;
    int grid_height = 2;
    double radius = 0.0;
    std::uint64_t seed = 0;
};

/**
 * Builds a random instance.
 *
 *  - random-dirichlet: every transition row ~ Dirichlet(1, ..., 1).
 *  - deterministic-chain: every (h, s, a) moves to one fixed, seeded next state.
 *  - drone-grid: states are grid cells, actions {stay, left, right, up, down}
 *    clipped at the border; M objects are dropped on seeded cells and a drone on
 *    a cell covers every object within `radius` of that cell's center.
 *
 * For the first two kinds the oracle is drawn according to `oracle`; modular
 * values are scaled so that any K distinct pairs sum to at most 1.
 */
MamdpSpec generate_instance(const GeneratorSpec& spec);

GeneratorSpec generator_from_json(const io::json& j);
io::json generator_to_json(const GeneratorSpec& spec);

struct ExperimentConfig {
    std::optional<std::filesystem::path> instance_file;
    std::optional<GeneratorSpec> generator;
    std::string algorithm;  // plan | learn | exact | check
    io::json params = io::json::object();
    std::vector<std::uint64_t> seeds;
    std::filesystem::path output_dir;
};

/// Validates: exactly one instance source, known algorithm, nonempty seeds.
ExperimentConfig experiment_from_json(const io::json& j);

/// $MARLS_OUTPUT_ROOT, or "results" when unset.
std::filesystem::path default_output_root();

/**
 * Runs the configured algorithm once per seed (seeds run concurrently, each in
 * its own `seed_<n>/` directory) and writes `manifest.json` with the resolved
 * configuration, the derived constants and per-seed summaries. Returns the
 * manifest.
 */
io::json run_experiment(const ExperimentConfig& config);

}  // namespace marls
