#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "cascade/bandit.hpp"

namespace cascade {

/// Columns: round,phase,seed_set,spread,f_exp,regret,rho_star,lambda_min,radius_sq.
/// Seeds are ';'-joined; reals use 17 significant digits.
void write_rounds_csv(std::ostream& out, const RunResult& run);

/// Inverse of write_rounds_csv for the logged columns.
std::vector<RoundLog> read_rounds_csv(std::istream& in);

/// Prefix sums of the regret column in file order.
std::vector<double> cumulative_regret(const std::vector<RoundLog>& logs);

/// Writes <stem>.csv and <stem>.json (metadata) into dir.
void write_run(const std::filesystem::path& dir, const std::string& stem, const RunResult& run);

}  // namespace cascade
