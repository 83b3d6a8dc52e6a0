#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "ecmc/common.hpp"
#include "ecmc/csv.hpp"

namespace ecmc {

using BoolMask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

// One aggregated export flow for the selected year.
struct TradeFlowRecord {
    std::string country;
    std::string product;
    double value = 0.0;
};

// Flows for one year with unique (country, product) pairs, sorted by
// country then product.
struct TradeFlowTable {
    int year = 0;
    std::vector<TradeFlowRecord> records;
};

// Specialisation ratios with an explicit missing mask; missing cells hold 0.
struct RcaMatrix {
    std::vector<std::string> countries;
    std::vector<std::string> products;
    Eigen::MatrixXd values;
    BoolMask missing;
};

// Nine-group classification: -4..-1 below parity, 1..4 at or above parity,
// 0 marks missing cells.
struct DiscreteMatrix {
    std::vector<std::string> countries;
    std::vector<std::string> products;
    Eigen::MatrixXi groups;
};

// Natural log of the ratios; cells that are missing or non-positive are masked.
struct LogRcaMatrix {
    std::vector<std::string> countries;
    std::vector<std::string> products;
    Eigen::MatrixXd values;
    BoolMask missing;
};

// Reads a flow CSV with header country,product,year,value, keeps rows of the
// requested year and sums duplicate (country, product) pairs. Throws
// ParseError on malformed rows or negative values, EmptyInputError when the
// year has no rows.
TradeFlowTable load_trade_flows(const std::filesystem::path& path, int year);

// Reads a CSV with header country,population. Duplicate countries and
// negative populations are ParseErrors.
std::map<std::string, long long> load_populations(const std::filesystem::path& path);

// Keeps countries whose population is at least `threshold`. Countries absent
// from the population table are dropped with a warning.
TradeFlowTable filter_by_population(const TradeFlowTable& table,
                                    const std::map<std::string, long long>& populations,
                                    long long threshold = 5'000'000,
                                    WarningList* warnings = nullptr);

// Re-aggregates flows onto truncated product codes (the first `prefix_length`
// characters), e.g. 4-digit headings onto 2-digit chapters.
TradeFlowTable aggregate_to_prefix(const TradeFlowTable& table, std::size_t prefix_length);

// Export share of a country in a product relative to the world share of that
// product. Cells are missing where the flow is absent or where a required
// total is zero. Throws EmptyInputError on an empty or all-zero table.
RcaMatrix compute_rca(const TradeFlowTable& table);

// Assigns observed cells to eight groups by quartiles of the below-parity and
// at-or-above-parity sub-distributions; missing cells get group 0. A side with
// no observations is skipped with a warning.
DiscreteMatrix discretize(const RcaMatrix& rca, WarningList* warnings = nullptr);

// ln(RCA) for observed positive cells; observed zeros are masked and counted
// in a warning.
LogRcaMatrix log_transform(const RcaMatrix& rca, WarningList* warnings = nullptr);

// CSV projections. Discrete groups serialize as integers with 0 for missing;
// the real-valued matrices serialize missing cells as NA.
LabeledMatrix to_labeled(const RcaMatrix& rca);
LabeledMatrix to_labeled(const DiscreteMatrix& discrete);
LabeledMatrix to_labeled(const LogRcaMatrix& logs);

}  // namespace ecmc
