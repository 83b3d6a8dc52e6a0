#include "ecmc/data_ingest.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "ecmc/stats.hpp"

namespace ecmc {

namespace {

void require_header(const CsvTable& table, const std::vector<std::string>& expected,
                    const std::filesystem::path& path) {
    if (table.header != expected) {
        std::string want;
        for (const auto& h : expected) {
            if (!want.empty()) want += ",";
            want += h;
        }
        std::string got;
        for (const auto& h : table.header) {
            if (!got.empty()) got += ",";
            got += h;
        }
        throw ParseError(path.string() + ": expected header '" + want + "', found '" + got + "'");
    }
}

}  // namespace

TradeFlowTable load_trade_flows(const std::filesystem::path& path, int year) {
    const CsvTable csv = read_csv(path);
    require_header(csv, {"country", "product", "year", "value"}, path);

    std::map<std::pair<std::string, std::string>, double> totals;
    std::size_t line = 1;
    for (const auto& row : csv.rows) {
        ++line;
        const std::string context = path.string() + ":" + std::to_string(line);
        if (row[0].empty() || row[1].empty()) {
            throw ParseError(context + ": empty country or product code");
        }
        const long long row_year = parse_integer(row[2], context + " year");
        if (row_year != year) {
            continue;
        }
        const double value = parse_double(row[3], context + " value");
        if (!std::isfinite(value) || value < 0.0) {
            throw ParseError(context + ": export value must be finite and non-negative");
        }
        totals[{row[0], row[1]}] += value;
    }
    if (totals.empty()) {
        throw EmptyInputError(path.string() + ": no rows for year " + std::to_string(year));
    }

    TradeFlowTable table;
    table.year = year;
    table.records.reserve(totals.size());
    for (const auto& [key, value] : totals) {
        table.records.push_back({key.first, key.second, value});
    }
    return table;
}

std::map<std::string, long long> load_populations(const std::filesystem::path& path) {
    const CsvTable csv = read_csv(path);
    require_header(csv, {"country", "population"}, path);

    std::map<std::string, long long> populations;
    std::size_t line = 1;
    for (const auto& row : csv.rows) {
        ++line;
        const std::string context = path.string() + ":" + std::to_string(line);
        if (row[0].empty()) {
            throw ParseError(context + ": empty country code");
        }
        const long long population = parse_integer(row[1], context + " population");
        if (population < 0) {
            throw ParseError(context + ": population must be non-negative");
        }
        if (!populations.emplace(row[0], population).second) {
            throw ParseError(context + ": duplicate country '" + row[0] + "'");
        }
    }
    return populations;
}

TradeFlowTable filter_by_population(const TradeFlowTable& table,
                                    const std::map<std::string, long long>& populations,
                                    long long threshold,
                                    WarningList* warnings) {
    std::set<std::string> dropped_unknown;
    TradeFlowTable filtered;
    filtered.year = table.year;
    for (const auto& record : table.records) {
        const auto it = populations.find(record.country);
        if (it == populations.end()) {
            dropped_unknown.insert(record.country);
            continue;
        }
        if (it->second >= threshold) {
            filtered.records.push_back(record);
        }
    }
    for (const auto& country : dropped_unknown) {
        warn(warnings, "country '" + country + "' missing from population table, dropped");
    }
    return filtered;
}

TradeFlowTable aggregate_to_prefix(const TradeFlowTable& table, std::size_t prefix_length) {
    if (prefix_length == 0) {
        throw ContractViolation("aggregate_to_prefix: zero prefix length");
    }
    std::map<std::pair<std::string, std::string>, double> totals;
    for (const auto& record : table.records) {
        totals[{record.country, record.product.substr(0, prefix_length)}] += record.value;
    }
    TradeFlowTable aggregated;
    aggregated.year = table.year;
    aggregated.records.reserve(totals.size());
    for (const auto& [key, value] : totals) {
        aggregated.records.push_back({key.first, key.second, value});
    }
    return aggregated;
}

RcaMatrix compute_rca(const TradeFlowTable& table) {
    if (table.records.empty()) {
        throw EmptyInputError("trade flow table has no records");
    }

    std::set<std::string> country_set;
    std::set<std::string> product_set;
    for (const auto& record : table.records) {
        country_set.insert(record.country);
        product_set.insert(record.product);
    }

    RcaMatrix rca;
    rca.countries.assign(country_set.begin(), country_set.end());
    rca.products.assign(product_set.begin(), product_set.end());
    const auto rows = static_cast<Eigen::Index>(rca.countries.size());
    const auto cols = static_cast<Eigen::Index>(rca.products.size());

    std::map<std::string, Eigen::Index> country_index;
    std::map<std::string, Eigen::Index> product_index;
    for (Eigen::Index i = 0; i < rows; ++i) country_index[rca.countries[static_cast<std::size_t>(i)]] = i;
    for (Eigen::Index j = 0; j < cols; ++j) product_index[rca.products[static_cast<std::size_t>(j)]] = j;

    Eigen::MatrixXd flows = Eigen::MatrixXd::Zero(rows, cols);
    BoolMask observed = BoolMask::Constant(rows, cols, false);
    for (const auto& record : table.records) {
        const Eigen::Index r = country_index[record.country];
        const Eigen::Index c = product_index[record.product];
        flows(r, c) = record.value;
        observed(r, c) = true;
    }

    const Eigen::VectorXd country_totals = flows.rowwise().sum();
    const Eigen::VectorXd product_totals = flows.colwise().sum();
    const double grand_total = flows.sum();
    if (grand_total <= 0.0) {
        throw EmptyInputError("trade flow table sums to zero");
    }

    rca.values = Eigen::MatrixXd::Zero(rows, cols);
    rca.missing = BoolMask::Constant(rows, cols, true);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            if (!observed(r, c) || country_totals(r) == 0.0 || product_totals(c) == 0.0) {
                continue;
            }
            const double country_share = flows(r, c) / country_totals(r);
            const double world_share = product_totals(c) / grand_total;
            rca.values(r, c) = country_share / world_share;
            rca.missing(r, c) = false;
        }
    }
    return rca;
}

DiscreteMatrix discretize(const RcaMatrix& rca, WarningList* warnings) {
    std::vector<double> below;
    std::vector<double> above;
    for (Eigen::Index r = 0; r < rca.values.rows(); ++r) {
        for (Eigen::Index c = 0; c < rca.values.cols(); ++c) {
            if (rca.missing(r, c)) continue;
            (rca.values(r, c) < 1.0 ? below : above).push_back(rca.values(r, c));
        }
    }
    std::sort(below.begin(), below.end());
    std::sort(above.begin(), above.end());
    if (below.empty()) {
        warn(warnings, "no observed ratios below parity; groups -4..-1 unused");
    }
    if (above.empty()) {
        warn(warnings, "no observed ratios at or above parity; groups 1..4 unused");
    }
    const std::vector<double> below_edges =
        below.empty() ? std::vector<double>{} : interior_percentile_edges(below, 3);
    const std::vector<double> above_edges =
        above.empty() ? std::vector<double>{} : interior_percentile_edges(above, 3);

    DiscreteMatrix discrete;
    discrete.countries = rca.countries;
    discrete.products = rca.products;
    discrete.groups = Eigen::MatrixXi::Zero(rca.values.rows(), rca.values.cols());
    for (Eigen::Index r = 0; r < rca.values.rows(); ++r) {
        for (Eigen::Index c = 0; c < rca.values.cols(); ++c) {
            if (rca.missing(r, c)) continue;
            const double value = rca.values(r, c);
            if (value < 1.0) {
                discrete.groups(r, c) = -4 + bin_by_edges(value, below_edges);
            } else {
                discrete.groups(r, c) = 1 + bin_by_edges(value, above_edges);
            }
        }
    }
    return discrete;
}

LogRcaMatrix log_transform(const RcaMatrix& rca, WarningList* warnings) {
    LogRcaMatrix logs;
    logs.countries = rca.countries;
    logs.products = rca.products;
    logs.values = Eigen::MatrixXd::Zero(rca.values.rows(), rca.values.cols());
    logs.missing = rca.missing;
    int masked_zeros = 0;
    for (Eigen::Index r = 0; r < rca.values.rows(); ++r) {
        for (Eigen::Index c = 0; c < rca.values.cols(); ++c) {
            if (rca.missing(r, c)) continue;
            if (rca.values(r, c) <= 0.0) {
                logs.missing(r, c) = true;
                ++masked_zeros;
            } else {
                logs.values(r, c) = std::log(rca.values(r, c));
            }
        }
    }
    if (masked_zeros > 0) {
        warn(warnings, std::to_string(masked_zeros) +
                           " observed zero ratios masked in log transform");
    }
    return logs;
}

LabeledMatrix to_labeled(const RcaMatrix& rca) {
    LabeledMatrix m = make_labeled_matrix("country", rca.countries, rca.products);
    m.values = rca.values;
    m.present = !rca.missing;
    return m;
}

LabeledMatrix to_labeled(const DiscreteMatrix& discrete) {
    LabeledMatrix m = make_labeled_matrix("country", discrete.countries, discrete.products);
    m.values = discrete.groups.cast<double>();
    return m;
}

LabeledMatrix to_labeled(const LogRcaMatrix& logs) {
    LabeledMatrix m = make_labeled_matrix("country", logs.countries, logs.products);
    m.values = logs.values;
    m.present = !logs.missing;
    return m;
}

}  // namespace ecmc
