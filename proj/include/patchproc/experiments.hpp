#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "patchproc/model.hpp"
#include "patchproc/oracle.hpp"
#include "patchproc/powerlaw.hpp"
#include "patchproc/ssa.hpp"

namespace patchproc {

/// Budget and seeding shared by every reproduction. Each cell draws its own master seed from
/// `seed` and a cell tag, so cells can be rerun individually.
struct ExperimentOptions {
    std::int64_t n = 1'000'000;
    std::uint64_t seed = 20190611;
    unsigned threads = 0;
    /// Fixed outbreak threshold; the quasi-steady threshold of each cell when unset.
    std::optional<std::int64_t> outbreak_threshold;
    std::int64_t max_events = 10'000'000;
    double max_time = 1e4;
    bool with_oracle = false;  ///< attach the truncated-chain bracket where it fits in memory
};

/// splitmix64 of the master seed mixed with an FNV-1a hash of `tag`.
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag);

/// Stop rule for one cell: the configured threshold or the model's quasi-steady threshold.
StopRule cell_stop_rule(const ModelSpec& model, const ExperimentOptions& opt);

enum class TableId { T2, T4, T3dM, T5 };
std::string table_name(TableId id);
TableId parse_table_id(std::string_view s);

struct TableRow {
    StateVec init;                    ///< full CTMC state (susceptibles at the DFE)
    std::vector<std::int64_t> z0;     ///< infectious counts
    double p0_mtbp = 0.0;
    ExtinctionEstimate mc;
    double reference_mc = 0.0;            ///< value printed in the source table, for comparison
    std::int64_t outbreak_threshold = 0;
    std::uint64_t seed = 0;
    double seconds = 0.0;
};

struct TableResult {
    TableId id = TableId::T4;
    ParamSet params;
    std::vector<double> q;  ///< MTBP extinction vector
    std::vector<TableRow> rows;
};

/// Parameters and initial infectious states of the single-table reproductions (T2, T4, T3dM).
ParamSet table_params(TableId id);
std::vector<std::vector<std::int64_t>> table_initial_infectious(TableId id);
std::vector<double> table_reference_mc(TableId id);

/// Reproduces T2, T4 or T3dM. T5 is a set of sweeps; see reproduce_t5.
TableResult reproduce_table(TableId id, const ExperimentOptions& opt);

struct SweepConfig {
    std::string name;
    double alpha = 3.3;
    double delta = 1.3;
    double omega = 4.0;
    ForceOfInfection foi = MassAction{};

    ParamSet1P at(double beta) const;  ///< mu = 1, so S-bar equals beta
};

/// The three configurations compared in the critical-size study, in table column order.
std::vector<SweepConfig> critical_size_configs();
std::vector<double> critical_size_betas();
/// Reference values: absolute-error columns and the exponent of the fitted P0 curve.
std::vector<double> reference_abs_err(std::size_t config_index);
double reference_value_exponent(std::size_t config_index);

struct SweepRow {
    double beta = 0.0;
    double s_bar = 0.0;
    bool subcritical = false;  ///< R0 <= 1: flagged, no MC or error columns
    double p0_mtbp = 1.0;
    McEstimate p0_mc;
    std::int64_t censored = 0;
    double abs_err = 0.0;
    std::optional<double> rel_err;  ///< undefined when p_hat = 0
    std::int64_t outbreak_threshold = 0;
    std::uint64_t seed = 0;
    double seconds = 0.0;
    std::optional<OracleBracket> oracle;
};

/// One row per beta with initial state (S-bar, 1, 0).
std::vector<SweepRow> beta_sweep(const SweepConfig& config, const std::vector<double>& betas,
                                 const ExperimentOptions& opt);

struct SweepFits {
    PowerLawFit value;     ///< MC P0 against beta
    PowerLawFit abs_err;
    std::optional<PowerLawFit> rel_err;
};
SweepFits fit_sweep(const std::vector<SweepRow>& rows);

/// Number of strict increases in a sequence that should be nonincreasing.
int count_inversions(const std::vector<double>& values);

struct SweepResult {
    SweepConfig config;
    std::vector<SweepRow> rows;
    SweepFits fits;
};

std::vector<SweepResult> reproduce_t5(const ExperimentOptions& opt);

/// CSV writers. Columns follow the source tables with std_err and censored columns appended.
void write_table_csv(const std::filesystem::path& file, const TableResult& t);
void write_t5_csv(const std::filesystem::path& file, const std::vector<SweepResult>& sweeps);
void write_sweep_csv(const std::filesystem::path& file, const std::vector<SweepRow>& rows);

nlohmann::json to_json(const ExperimentOptions& opt);
nlohmann::json to_json(const TableResult& t);
nlohmann::json to_json(const SweepRow& r);
nlohmann::json to_json(const SweepResult& s);
nlohmann::json to_json(const PowerLawFit& f);

}  // namespace patchproc
