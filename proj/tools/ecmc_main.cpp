// Batch front end: rca -> complete -> indices, each stage writing CSV/SVG/JSON
// artifacts plus a manifest into the output directory.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ecmc/common.hpp"
#include "ecmc/csv.hpp"
#include "ecmc/data_ingest.hpp"
#include "ecmc/evaluation.hpp"
#include "ecmc/genepy.hpp"
#include "ecmc/manifest.hpp"
#include "ecmc/mc_experiment.hpp"
#include "ecmc/money_index.hpp"
#include "ecmc/soft_impute.hpp"
#include "ecmc/svg.hpp"
#include "ecmc/svt_core.hpp"

namespace fs = std::filesystem;
using namespace ecmc;

namespace {

// Reference group: the G20 members as countries, with the EU seat expanded
// into its larger economies, 24 codes total. A --groups file overrides it.
const std::vector<std::string> kDefaultReferenceGroup = {
    "ARG", "AUS", "BRA", "CAN", "CHE", "CHN", "DEU", "DNK", "ESP", "FRA", "GBR", "GRC",
    "HUN", "IDN", "IND", "ITA", "JPN", "KOR", "MEX", "RUS", "SAU", "TUR", "USA", "ZAF"};

struct RcaOptions {
    std::string input;
    std::string population;
    std::string out;
    int year = 0;
    std::string level = "hs4";
    std::string transform = "discrete";
    long long min_population = 5'000'000;
};

struct CompleteOptions {
    std::string out;
    std::string transform = "discrete";
    int reps = 50;
    std::uint64_t seed = 0;
    std::string lambda_grid = "step";
    double p_missing = 0.3;
    double row_fraction = 0.25;
    double tolerance = 1e-9;
    int max_iterations = 1500;
    bool warm_start = false;
    int threads = 1;
    bool paper_scale = false;
};

struct IndicesOptions {
    std::string out;
    std::string transform = "discrete";
    std::string groups_file;
};

class StageTimer {
public:
    explicit StageTimer(RunManifest& manifest) : manifest_(manifest) {}

    void finish(const std::string& stage) {
        const auto now = std::chrono::steady_clock::now();
        const double seconds = std::chrono::duration<double>(now - mark_).count();
        manifest_.stage_seconds.emplace_back(stage, seconds);
        mark_ = now;
    }

private:
    RunManifest& manifest_;
    std::chrono::steady_clock::time_point mark_ = std::chrono::steady_clock::now();
};

std::string sanitize_for_filename(const std::string& label) {
    std::string safe;
    for (char c : label) {
        const bool ok = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
                        (c >= '0' && c <= '9') || c == '-' || c == '_' || c == '.';
        safe.push_back(ok ? c : '_');
    }
    return safe;
}

void emit_real_matrix(const fs::path& path, const std::string& corner,
                      const std::vector<std::string>& rows,
                      const std::vector<std::string>& cols, const Eigen::MatrixXd& values) {
    LabeledMatrix m = make_labeled_matrix(corner, rows, cols);
    m.values = values;
    write_matrix_csv(path, m);
}

void emit_int_matrix(const fs::path& path, const std::string& corner,
                     const std::vector<std::string>& rows,
                     const std::vector<std::string>& cols, const Eigen::MatrixXi& values) {
    LabeledMatrix m = make_labeled_matrix(corner, rows, cols);
    m.values = values.cast<double>();
    write_matrix_csv(path, m);
}

void emit_rates(const fs::path& path, const std::string& entity,
                const std::vector<std::string>& labels, const RowErrorRates& rates) {
    std::ostringstream out;
    out << entity << ",fpr,fnr\n";
    for (std::size_t i = 0; i < labels.size(); ++i) {
        out << labels[i] << ',' << format_double(rates.false_positive_rate[i]) << ','
            << format_double(rates.false_negative_rate[i]) << '\n';
    }
    write_text_file(path, out.str());
}

void emit_rmse_records(const fs::path& path, const std::vector<RmseRecord>& records,
                       const std::vector<std::string>& row_labels) {
    std::ostringstream out;
    out << "n,h,lambda,val_rmse,test_rmse\n";
    for (const auto& record : records) {
        out << record.repetition << ','
            << row_labels[static_cast<std::size_t>(record.row)] << ','
            << format_double(record.lambda) << ',' << format_double(record.validation_rmse)
            << ',' << format_double(record.test_rmse) << '\n';
    }
    write_text_file(path, out.str());
}

void emit_roc_csv(const fs::path& path, const RocCurve& curve) {
    std::ostringstream out;
    out << "threshold,fpr,tpr\n";
    for (std::size_t i = 0; i < curve.false_positive.size(); ++i) {
        out << format_double(curve.thresholds[i]) << ','
            << format_double(curve.false_positive[i]) << ','
            << format_double(curve.true_positive[i]) << '\n';
    }
    write_text_file(path, out.str());
}

ChartSeries roc_series(const std::string& label, const RocCurve& curve) {
    ChartSeries series;
    series.label = label;
    series.points.emplace_back(0.0, 0.0);
    for (std::size_t i = curve.false_positive.size(); i-- > 0;) {
        series.points.emplace_back(curve.false_positive[i], curve.true_positive[i]);
    }
    return series;
}

// Truth panel shared by the completion and index stages.
struct StageInput {
    std::vector<std::string> countries;
    std::vector<std::string> products;
    Eigen::MatrixXd values;   // group codes or log ratios
    BoolMask eligible;
    Eigen::MatrixXi truth;    // specialised (>= parity) among eligible cells
};

StageInput load_stage_input(const fs::path& out_dir, const std::string& transform) {
    StageInput input;
    if (transform == "discrete") {
        const LabeledMatrix m = read_matrix_csv(out_dir / "discrete.csv");
        input.countries = m.row_labels;
        input.products = m.col_labels;
        input.values = m.values;
        input.eligible = BoolMask::Constant(m.rows(), m.cols(), false);
        input.truth = Eigen::MatrixXi::Zero(m.rows(), m.cols());
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            for (Eigen::Index c = 0; c < m.cols(); ++c) {
                const double v = m.values(r, c);
                if (!m.present(r, c) || v != std::round(v) || v < -4.0 || v > 4.0) {
                    throw ParseError("discrete.csv: cell (" + m.row_labels[r] + ", " +
                                     m.col_labels[c] + ") is not a group code");
                }
                input.eligible(r, c) = v != 0.0;
                input.truth(r, c) = v > 0.0 ? 1 : 0;
            }
        }
    } else if (transform == "log") {
        const LabeledMatrix m = read_matrix_csv(out_dir / "log.csv");
        input.countries = m.row_labels;
        input.products = m.col_labels;
        input.values = m.values;
        input.eligible = m.present;
        input.truth = Eigen::MatrixXi::Zero(m.rows(), m.cols());
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            for (Eigen::Index c = 0; c < m.cols(); ++c) {
                input.truth(r, c) = (m.present(r, c) && m.values(r, c) >= 0.0) ? 1 : 0;
            }
        }
    } else {
        throw ConfigError("unknown transform '" + transform + "'");
    }
    return input;
}

std::vector<double> protocol_grid(const std::string& name) {
    if (name == "step") {
        return step_lambda_grid();
    }
    if (name == "appendix") {
        return spread_lambda_grid();
    }
    throw ConfigError("unknown penalty grid '" + name + "'");
}

Eigen::MatrixXi read_binary_matrix(const fs::path& path,
                                   const std::vector<std::string>& rows,
                                   const std::vector<std::string>& cols) {
    const LabeledMatrix m = read_matrix_csv(path);
    if (m.row_labels != rows || m.col_labels != cols) {
        throw ConfigError(path.string() + ": labels do not match discrete.csv");
    }
    Eigen::MatrixXi binary(m.rows(), m.cols());
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            const double v = m.values(r, c);
            if (!m.present(r, c) || (v != 0.0 && v != 1.0)) {
                throw ParseError(path.string() + ": expected a 0/1 matrix");
            }
            binary(r, c) = v != 0.0 ? 1 : 0;
        }
    }
    return binary;
}

Eigen::MatrixXd read_real_matrix(const fs::path& path, const std::vector<std::string>& rows,
                                 const std::vector<std::string>& cols) {
    const LabeledMatrix m = read_matrix_csv(path);
    if (m.row_labels != rows || m.col_labels != cols) {
        throw ConfigError(path.string() + ": labels do not match discrete.csv");
    }
    if (!m.present.all()) {
        throw ParseError(path.string() + ": unexpected NA cells");
    }
    return m.values;
}

RowErrorRates read_rates(const fs::path& path, const std::vector<std::string>& labels) {
    const CsvTable csv = read_csv(path);
    if (csv.header.size() != 3 || csv.header[1] != "fpr" || csv.header[2] != "fnr") {
        throw ParseError(path.string() + ": expected header <entity>,fpr,fnr");
    }
    if (csv.rows.size() != labels.size()) {
        throw ConfigError(path.string() + ": row count does not match discrete.csv");
    }
    RowErrorRates rates;
    auto parse_cell = [&](const std::string& cell, const std::string& context) {
        return cell == "NA" ? std::numeric_limits<double>::quiet_NaN()
                            : parse_double(cell, context);
    };
    for (std::size_t i = 0; i < csv.rows.size(); ++i) {
        if (csv.rows[i][0] != labels[i]) {
            throw ConfigError(path.string() + ": labels do not match discrete.csv");
        }
        rates.false_positive_rate.push_back(
            parse_cell(csv.rows[i][1], path.string() + " fpr"));
        rates.false_negative_rate.push_back(
            parse_cell(csv.rows[i][2], path.string() + " fnr"));
    }
    return rates;
}

std::set<std::string> load_reference_group(const std::string& groups_file) {
    if (groups_file.empty()) {
        return {kDefaultReferenceGroup.begin(), kDefaultReferenceGroup.end()};
    }
    const CsvTable csv = read_csv(groups_file);
    if (csv.header.empty() || csv.header[0] != "country") {
        throw ParseError(groups_file + ": expected header 'country'");
    }
    std::set<std::string> group;
    for (const auto& row : csv.rows) {
        group.insert(row[0]);
    }
    if (group.empty()) {
        throw EmptyInputError(groups_file + ": no countries listed");
    }
    return group;
}

nlohmann::json correlation_json(const std::vector<double>& first,
                                const std::vector<double>& second,
                                const std::string& name, WarningList* warnings) {
    try {
        const RankCorrelation k = kendall_tau(first, second);
        nlohmann::json j;
        j["tau"] = k.tau;
        j["p_value"] = k.p_value;
        j["pairs"] = k.pairs_used;
        return j;
    } catch (const ContractViolation&) {
        warn(warnings, "correlation '" + name + "' skipped: fewer than three complete pairs");
        return {{"tau", nullptr}, {"p_value", nullptr}, {"pairs", 0}};
    }
}

// ---------------------------------------------------------------------------

int cmd_rca(const RcaOptions& opt) {
    fs::create_directories(opt.out);
    RunManifest manifest;
    manifest.command = "rca";
    manifest.config = {{"input", opt.input},
                       {"population", opt.population},
                       {"year", std::to_string(opt.year)},
                       {"level", opt.level},
                       {"transform", opt.transform},
                       {"min_population", std::to_string(opt.min_population)}};
    manifest.input_digests.emplace_back(opt.input, file_digest(opt.input));
    if (!opt.population.empty()) {
        manifest.input_digests.emplace_back(opt.population, file_digest(opt.population));
    }
    const fs::path manifest_path = fs::path(opt.out) / "manifest_rca.json";
    write_manifest(manifest_path, manifest);

    if (opt.level != "hs4" && opt.level != "hs2") {
        throw ConfigError("unknown level '" + opt.level + "'");
    }
    if (opt.transform != "discrete" && opt.transform != "log") {
        throw ConfigError("unknown transform '" + opt.transform + "'");
    }

    WarningList warnings;
    StageTimer timer(manifest);
    TradeFlowTable table = load_trade_flows(opt.input, opt.year);
    if (opt.level == "hs2") {
        table = aggregate_to_prefix(table, 2);
    }
    if (!opt.population.empty()) {
        const auto populations = load_populations(opt.population);
        table = filter_by_population(table, populations, opt.min_population, &warnings);
        if (table.records.empty()) {
            throw EmptyInputError("no countries remain after the population filter");
        }
    }
    timer.finish("ingest");

    const RcaMatrix rca = compute_rca(table);
    const DiscreteMatrix discrete = discretize(rca, &warnings);
    timer.finish("rca");

    write_matrix_csv(fs::path(opt.out) / "rca.csv", to_labeled(rca));
    write_matrix_csv(fs::path(opt.out) / "discrete.csv", to_labeled(discrete));
    if (opt.transform == "log") {
        const LogRcaMatrix logs = log_transform(rca, &warnings);
        write_matrix_csv(fs::path(opt.out) / "log.csv", to_labeled(logs));
    }
    timer.finish("emit");

    manifest.warnings = warnings;
    write_manifest(manifest_path, manifest);
    return 0;
}

int cmd_complete(const CompleteOptions& opt) {
    fs::create_directories(opt.out);
    ProtocolConfig config;
    config.repetitions = opt.paper_scale ? 1000 : opt.reps;
    config.row_fraction = opt.paper_scale ? 0.25 : opt.row_fraction;
    config.missing_probability = opt.paper_scale ? 0.3 : opt.p_missing;
    config.lambda_grid = protocol_grid(opt.paper_scale ? "step" : opt.lambda_grid);
    config.clip = opt.transform == "discrete";
    config.base_seed = opt.seed;
    config.solver_tolerance = opt.tolerance;
    config.solver_max_iterations = opt.max_iterations;
    config.warm_start_path = opt.warm_start;
    config.threads = opt.threads;
    config.validate();

    const fs::path source = fs::path(opt.out) /
                            (opt.transform == "discrete" ? "discrete.csv" : "log.csv");
    RunManifest manifest;
    manifest.command = "complete";
    manifest.config = {{"transform", opt.transform},
                       {"reps", std::to_string(config.repetitions)},
                       {"seed", std::to_string(opt.seed)},
                       {"lambda_grid", opt.paper_scale ? "step" : opt.lambda_grid},
                       {"p_missing", format_double(config.missing_probability)},
                       {"row_fraction", format_double(config.row_fraction)},
                       {"tolerance", format_double(config.solver_tolerance)},
                       {"max_iterations", std::to_string(config.solver_max_iterations)},
                       {"warm_start", opt.warm_start ? "true" : "false"},
                       {"threads", std::to_string(opt.threads)},
                       {"paper_scale", opt.paper_scale ? "true" : "false"}};
    manifest.input_digests.emplace_back(source.string(), file_digest(source));
    const fs::path manifest_path = fs::path(opt.out) / "manifest_complete.json";
    write_manifest(manifest_path, manifest);

    const StageInput input = load_stage_input(opt.out, opt.transform);
    const ExperimentInput experiment{input.values, input.eligible};

    WarningList warnings;
    StageTimer timer(manifest);
    const AggregatedPredictions country =
        run_experiment(experiment, config, ExperimentSide::country, &warnings);
    timer.finish("country_side");
    const AggregatedPredictions product = run_product_side(experiment, config, &warnings);
    timer.finish("product_side");

    const fs::path out(opt.out);
    emit_real_matrix(out / "abar.csv", "country", input.countries, input.products,
                     country.mean_positive);
    emit_int_matrix(out / "ahat.csv", "country", input.countries, input.products,
                    country.majority_positive);
    emit_int_matrix(out / "appearances.csv", "country", input.countries, input.products,
                    country.test_appearances);
    emit_real_matrix(out / "mbar.csv", "country", input.countries, input.products,
                     surrogate_mean(country, input.eligible));
    emit_int_matrix(out / "mhat.csv", "country", input.countries, input.products,
                    surrogate_majority(country, input.eligible));
    const BoolMask eligible_t = input.eligible.transpose();
    emit_real_matrix(out / "abar_t.csv", "product", input.products, input.countries,
                     product.mean_positive);
    emit_int_matrix(out / "ahat_t.csv", "product", input.products, input.countries,
                    product.majority_positive);
    emit_int_matrix(out / "appearances_t.csv", "product", input.products, input.countries,
                    product.test_appearances);
    emit_real_matrix(out / "mbar_t.csv", "product", input.products, input.countries,
                     surrogate_mean(product, eligible_t));
    emit_int_matrix(out / "mhat_t.csv", "product", input.products, input.countries,
                    surrogate_majority(product, eligible_t));
    emit_rmse_records(out / "rmse_records.csv", country.rmse_records, input.countries);
    emit_rmse_records(out / "rmse_records_t.csv", product.rmse_records, input.products);
    emit_rates(out / "rates.csv", "country", input.countries, row_error_rates(country));
    emit_rates(out / "rates_t.csv", "product", input.products, row_error_rates(product));
    timer.finish("emit");

    const int failed = country.failed_repetitions + product.failed_repetitions;
    const int total = country.total_repetitions + product.total_repetitions;
    manifest.config["failed_repetitions"] = std::to_string(failed);
    manifest.warnings = warnings;
    write_manifest(manifest_path, manifest);

    if (10 * failed > total) {
        std::cerr << "completion: " << failed << " of " << total
                  << " repetitions failed\n";
        return 3;
    }
    return 0;
}

int cmd_indices(const IndicesOptions& opt) {
    const fs::path out(opt.out);
    const StageInput input = load_stage_input(out, opt.transform);
    const std::set<std::string> reference_group = load_reference_group(opt.groups_file);

    const Eigen::MatrixXd mbar = read_real_matrix(out / "mbar.csv", input.countries,
                                                  input.products);
    const Eigen::MatrixXi mhat = read_binary_matrix(out / "mhat.csv", input.countries,
                                                    input.products);
    const Eigen::MatrixXd mbar_t = read_real_matrix(out / "mbar_t.csv", input.products,
                                                    input.countries);
    const Eigen::MatrixXi mhat_t = read_binary_matrix(out / "mhat_t.csv", input.products,
                                                      input.countries);
    const RowErrorRates rates = read_rates(out / "rates.csv", input.countries);

    RunManifest manifest;
    manifest.command = "indices";
    manifest.config = {{"transform", opt.transform},
                       {"groups", opt.groups_file.empty() ? "<built-in>" : opt.groups_file}};
    for (const char* name :
         {"discrete.csv", "mbar.csv", "mhat.csv", "mbar_t.csv", "mhat_t.csv", "rates.csv"}) {
        if (std::string(name) == "discrete.csv" && opt.transform == "log") {
            manifest.input_digests.emplace_back((out / "log.csv").string(),
                                                file_digest(out / "log.csv"));
            continue;
        }
        manifest.input_digests.emplace_back((out / name).string(), file_digest(out / name));
    }
    const fs::path manifest_path = out / "manifest_indices.json";
    write_manifest(manifest_path, manifest);

    WarningList warnings;
    StageTimer timer(manifest);

    // Reliability of each country's mean predictions.
    const std::vector<double> thresholds = default_threshold_grid();
    const RowRocSet rocs = row_rocs(mbar, input.truth, input.eligible, thresholds, &warnings);
    const Eigen::MatrixXi truth_t = input.truth.transpose();
    const BoolMask eligible_t = input.eligible.transpose();
    const ProductWeightTable weight_table =
        product_weight_table(mbar_t, truth_t, eligible_t, thresholds, &warnings);
    const std::vector<double> weights =
        country_weights(mhat_t, weight_table.ftot_mean, &warnings);
    const std::vector<double> money = money_scores(rocs.auc, weights);
    timer.finish("money");

    std::vector<ChartSeries> overlay;
    for (std::size_t c = 0; c < input.countries.size(); ++c) {
        const RocCurve& curve = rocs.curves[c];
        const std::string code = sanitize_for_filename(input.countries[c]);
        emit_roc_csv(out / "roc" / ("roc_" + code + ".csv"), curve);
        if (!curve.false_positive.empty()) {
            char title[128];
            std::snprintf(title, sizeof(title), "ROC %s (AUC %.4f)",
                          input.countries[c].c_str(), curve.auc);
            write_text_file(out / "roc" / ("roc_" + code + ".svg"),
                            render_unit_chart(title, "false positive rate",
                                              "true positive rate",
                                              {roc_series(input.countries[c], curve)}));
            overlay.push_back(roc_series(input.countries[c], curve));
        }
    }
    write_text_file(out / "roc_overlay.svg",
                    render_unit_chart("ROC by country", "false positive rate",
                                      "true positive rate", overlay));

    // money_scores.csv, ranked best (lowest) first; undefined scores get NA.
    std::vector<std::size_t> order;
    for (std::size_t c = 0; c < input.countries.size(); ++c) {
        if (std::isfinite(money[c])) order.push_back(c);
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (money[a] != money[b]) return money[a] < money[b];
        return input.countries[a] < input.countries[b];
    });
    std::vector<int> rank(input.countries.size(), -1);
    for (std::size_t position = 0; position < order.size(); ++position) {
        rank[order[position]] = static_cast<int>(position) + 1;
    }
    {
        std::ostringstream text;
        text << "country,auc,weight,money,rank\n";
        for (std::size_t c = 0; c < input.countries.size(); ++c) {
            text << input.countries[c] << ',' << format_double(rocs.auc[c]) << ','
                 << format_double(weights[c]) << ',' << format_double(money[c]) << ','
                 << (rank[c] > 0 ? std::to_string(rank[c]) : "NA") << '\n';
        }
        write_text_file(out / "money_scores.csv", text.str());
    }
    timer.finish("money_emit");

    // Spectral complexity on the observed incidence and on its counterfactual.
    const IncidenceMatrix original{input.countries, input.products, input.truth};
    const GenepyResult genepy_obs = genepy_from_incidence(original, &warnings);
    const GenepyResult genepy_mc =
        genepy_from_incidence({input.countries, input.products, mhat}, &warnings);
    const GenepyResult genepy_products_obs =
        genepy_from_incidence(incidence_transposed(original), &warnings);
    const GenepyResult genepy_products_mc =
        genepy_from_incidence({input.products, input.countries, mhat_t}, &warnings);
    timer.finish("genepy");

    auto scores_by_label = [](const GenepyResult& result) {
        std::map<std::string, double> by_label;
        for (std::size_t i = 0; i < result.entities.size(); ++i) {
            by_label[result.entities[i]] = result.scores.scores[i];
        }
        return by_label;
    };
    const auto genepy_by_country = scores_by_label(genepy_obs);
    const auto genepy_mc_by_country = scores_by_label(genepy_mc);
    const auto genepy_by_product = scores_by_label(genepy_products_obs);
    const auto genepy_mc_by_product = scores_by_label(genepy_products_mc);

    auto eigvec_by_label = [](const GenepyResult& result, const Eigen::VectorXd& vector) {
        std::map<std::string, double> by_label;
        for (std::size_t i = 0; i < result.entities.size(); ++i) {
            by_label[result.entities[i]] = vector(static_cast<Eigen::Index>(i));
        }
        return by_label;
    };
    const auto vec1_by_country = eigvec_by_label(genepy_obs, genepy_obs.scores.vector1);
    const auto vec2_by_country = eigvec_by_label(genepy_obs, genepy_obs.scores.vector2);

    constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
    auto lookup = [kNaN](const std::map<std::string, double>& table, const std::string& key) {
        const auto it = table.find(key);
        return it == table.end() ? kNaN : it->second;
    };

    {
        std::ostringstream text;
        text << "country,genepy,genepy_mc,difference,eigvec1,eigvec2\n";
        for (const auto& country : input.countries) {
            const double observed = lookup(genepy_by_country, country);
            const double counterfactual = lookup(genepy_mc_by_country, country);
            text << country << ',' << format_double(observed) << ','
                 << format_double(counterfactual) << ','
                 << format_double(counterfactual - observed) << ','
                 << format_double(lookup(vec1_by_country, country)) << ','
                 << format_double(lookup(vec2_by_country, country)) << '\n';
        }
        write_text_file(out / "genepy.csv", text.str());
    }
    {
        std::ostringstream text;
        text << "product,genepy,genepy_mc,difference\n";
        for (const auto& product : input.products) {
            const double observed = lookup(genepy_by_product, product);
            const double counterfactual = lookup(genepy_mc_by_product, product);
            text << product << ',' << format_double(observed) << ','
                 << format_double(counterfactual) << ','
                 << format_double(counterfactual - observed) << '\n';
        }
        write_text_file(out / "genepy_products.csv", text.str());
    }
    timer.finish("genepy_emit");

    // Pooled discrimination and rank agreement.
    const RocCurve pooled = global_roc(mbar, input.truth, input.eligible, thresholds,
                                       &warnings);
    emit_roc_csv(out / "roc_global.csv", pooled);
    if (!pooled.false_positive.empty()) {
        char title[128];
        std::snprintf(title, sizeof(title), "Pooled ROC (AUC %.4f)", pooled.auc);
        write_text_file(out / "roc_global.svg",
                        render_unit_chart(title, "false positive rate", "true positive rate",
                                          {roc_series("pooled", pooled)}));
    }
    const double bacc = balanced_accuracy(mhat, input.truth, input.eligible);

    std::vector<double> genepy_vec, genepy_mc_vec, money_vec, fpr_vec, fnr_vec;
    for (std::size_t c = 0; c < input.countries.size(); ++c) {
        genepy_vec.push_back(lookup(genepy_by_country, input.countries[c]));
        genepy_mc_vec.push_back(lookup(genepy_mc_by_country, input.countries[c]));
        money_vec.push_back(money[c]);
        fpr_vec.push_back(rates.false_positive_rate[c]);
        fnr_vec.push_back(rates.false_negative_rate[c]);
    }

    nlohmann::json correlations;
    correlations["genepy_vs_counterfactual"] =
        correlation_json(genepy_vec, genepy_mc_vec, "genepy_vs_counterfactual", &warnings);
    correlations["fpr_vs_genepy"] = correlation_json(fpr_vec, genepy_vec, "fpr_vs_genepy",
                                                     &warnings);
    correlations["fnr_vs_genepy"] = correlation_json(fnr_vec, genepy_vec, "fnr_vs_genepy",
                                                     &warnings);
    correlations["money_vs_genepy"] =
        correlation_json(money_vec, genepy_vec, "money_vs_genepy", &warnings);

    // Product ranking agreement, cross-tabulated by octile.
    std::vector<double> product_obs, product_mc;
    for (const auto& product : input.products) {
        product_obs.push_back(lookup(genepy_by_product, product));
        product_mc.push_back(lookup(genepy_mc_by_product, product));
    }
    nlohmann::json confusion_json;
    try {
        const PercentileConfusion confusion = percentile_confusion(product_obs, product_mc,
                                                                   &warnings);
        std::ostringstream text;
        text << "octile";
        for (int c = 1; c <= 8; ++c) text << ",mc_" << c;
        text << '\n';
        for (int r = 0; r < 8; ++r) {
            text << r + 1;
            for (int c = 0; c < 8; ++c) text << ',' << confusion.counts(r, c);
            text << '\n';
        }
        write_text_file(out / "confusion.csv", text.str());
        confusion_json["first_edges"] = confusion.first_edges;
        confusion_json["second_edges"] = confusion.second_edges;
    } catch (const ContractViolation&) {
        warn(&warnings, "confusion matrix skipped: fewer than two complete product pairs");
    }

    nlohmann::json ratios;
    const std::size_t scored_money = order.size();
    std::size_t scored_genepy = 0;
    std::size_t scored_genepy_mc = 0;
    for (std::size_t c = 0; c < input.countries.size(); ++c) {
        if (std::isfinite(genepy_vec[c])) ++scored_genepy;
        if (std::isfinite(genepy_mc_vec[c])) ++scored_genepy_mc;
    }
    for (std::size_t x : {std::size_t{20}, std::size_t{30}, std::size_t{40}}) {
        const std::string depth = std::to_string(x);
        if (x <= scored_money) {
            ratios["money"][depth] =
                top_group_ratio(input.countries, money_vec, reference_group, x, true);
        }
        if (x <= scored_genepy) {
            ratios["genepy"][depth] =
                top_group_ratio(input.countries, genepy_vec, reference_group, x, false);
        }
        if (x <= scored_genepy_mc) {
            ratios["genepy_counterfactual"][depth] =
                top_group_ratio(input.countries, genepy_mc_vec, reference_group, x, false);
        }
    }
    if (ratios.empty()) {
        warn(&warnings, "top-group ratios skipped: fewer scored countries than any depth");
    }
    timer.finish("evaluation");

    // Undefined entries, collected for the diagnostics file and the NA gate.
    std::vector<std::string> na_auc, na_weight, na_money;
    for (std::size_t c = 0; c < input.countries.size(); ++c) {
        if (!std::isfinite(rocs.auc[c])) na_auc.push_back(input.countries[c]);
        if (!std::isfinite(weights[c])) na_weight.push_back(input.countries[c]);
        if (!std::isfinite(money[c])) na_money.push_back(input.countries[c]);
    }
    {
        std::ostringstream text;
        auto list = [&text](const char* title, const std::vector<std::string>& items) {
            text << title << " (" << items.size() << ")";
            for (const auto& item : items) text << ' ' << item;
            text << '\n';
        };
        list("countries with undefined auc:", na_auc);
        list("countries with undefined weight:", na_weight);
        list("countries with undefined money:", na_money);
        list("countries outside the complexity network:", genepy_obs.dropped_entities);
        list("products outside the complexity network:", genepy_obs.dropped_features);
        write_text_file(out / "diagnostics.txt", text.str());
    }

    nlohmann::json report;
    report["global_auc"] = pooled.auc;
    report["balanced_accuracy"] = bacc;
    report["correlations"] = correlations;
    report["top_group_ratios"] = ratios;
    report["confusion_edges"] = confusion_json;
    report["na_counts"] = {{"auc", na_auc.size()},
                           {"weight", na_weight.size()},
                           {"money", na_money.size()},
                           {"genepy_dropped", genepy_obs.dropped_entities.size()}};
    write_text_file(out / "evaluation_report.json", report.dump(2) + "\n");

    manifest.warnings = warnings;
    write_manifest(manifest_path, manifest);

    const std::size_t total = input.countries.size();
    if (2 * na_money.size() > total || 2 * genepy_obs.dropped_entities.size() > total) {
        std::cerr << "indices: more than half the countries have undefined scores\n";
        return 4;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Trade specialisation reconstruction and complexity indices"};
    app.set_version_flag("--version", kToolVersion);
    app.set_config("--config")->check(CLI::ExistingFile);
    app.require_subcommand(1);

    RcaOptions rca_opt;
    CompleteOptions complete_opt;
    IndicesOptions indices_opt;
    std::string pipeline_from = "rca";

    auto add_rca_options = [&](CLI::App* cmd, bool input_required) {
        auto* input = cmd->add_option("--input", rca_opt.input, "trade flow CSV");
        if (input_required) input->required();
        cmd->add_option("--population", rca_opt.population, "population CSV");
        auto* year = cmd->add_option("--year", rca_opt.year, "year to keep");
        if (input_required) year->required();
        cmd->add_option("--level", rca_opt.level, "product level: hs4 or hs2")
            ->check(CLI::IsMember({"hs4", "hs2"}));
        cmd->add_option("--min-population", rca_opt.min_population,
                        "population threshold for the filter");
    };
    auto add_complete_options = [&](CLI::App* cmd) {
        cmd->add_option("--reps", complete_opt.reps, "masking repetitions");
        cmd->add_option("--seed", complete_opt.seed, "base seed");
        cmd->add_option("--lambda-grid", complete_opt.lambda_grid,
                        "penalty grid: step or appendix")
            ->check(CLI::IsMember({"step", "appendix"}));
        cmd->add_option("--p-missing", complete_opt.p_missing, "cell obscuring probability");
        cmd->add_option("--row-fraction", complete_opt.row_fraction,
                        "share of rows tested per repetition");
        cmd->add_option("--tolerance", complete_opt.tolerance, "solver stopping tolerance");
        cmd->add_option("--max-iterations", complete_opt.max_iterations,
                        "solver iteration budget");
        cmd->add_flag("--warm-start", complete_opt.warm_start,
                      "reuse solutions along the penalty grid");
        cmd->add_option("--threads", complete_opt.threads, "worker threads");
        cmd->add_flag("--paper-scale", complete_opt.paper_scale,
                      "reference protocol: 1000 repetitions, step grid");
    };

    std::string shared_out;
    std::string shared_transform = "discrete";

    CLI::App* rca_cmd = app.add_subcommand("rca", "ingest flows and discretize ratios");
    add_rca_options(rca_cmd, true);
    rca_cmd->add_option("--out", shared_out, "output directory")->required();
    rca_cmd->add_option("--transform", shared_transform,
                        "value transform: discrete or log")
        ->check(CLI::IsMember({"discrete", "log"}));

    CLI::App* complete_cmd =
        app.add_subcommand("complete", "mask, reconstruct, and aggregate predictions");
    add_complete_options(complete_cmd);
    complete_cmd->add_option("--out", shared_out, "output directory with discrete.csv")
        ->required();
    complete_cmd->add_option("--transform", shared_transform,
                             "value transform: discrete or log")
        ->check(CLI::IsMember({"discrete", "log"}));

    CLI::App* indices_cmd =
        app.add_subcommand("indices", "derive reliability and complexity indices");
    indices_cmd->add_option("--out", shared_out, "output directory with completion results")
        ->required();
    indices_cmd->add_option("--transform", shared_transform,
                            "value transform: discrete or log")
        ->check(CLI::IsMember({"discrete", "log"}));
    indices_cmd->add_option("--groups", indices_opt.groups_file,
                            "reference group CSV (header: country)");

    CLI::App* pipeline_cmd = app.add_subcommand("pipeline", "run all stages in order");
    add_rca_options(pipeline_cmd, false);
    add_complete_options(pipeline_cmd);
    pipeline_cmd->add_option("--out", shared_out, "output directory")->required();
    pipeline_cmd->add_option("--transform", shared_transform,
                             "value transform: discrete or log")
        ->check(CLI::IsMember({"discrete", "log"}));
    pipeline_cmd->add_option("--groups", indices_opt.groups_file,
                             "reference group CSV (header: country)");
    pipeline_cmd->add_option("--from", pipeline_from, "resume stage: rca, complete, indices")
        ->check(CLI::IsMember({"rca", "complete", "indices"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    rca_opt.out = shared_out;
    rca_opt.transform = shared_transform;
    complete_opt.out = shared_out;
    complete_opt.transform = shared_transform;
    indices_opt.out = shared_out;
    indices_opt.transform = shared_transform;

    try {
        if (rca_cmd->parsed()) {
            return cmd_rca(rca_opt);
        }
        if (complete_cmd->parsed()) {
            return cmd_complete(complete_opt);
        }
        if (indices_cmd->parsed()) {
            return cmd_indices(indices_opt);
        }
        if (pipeline_cmd->parsed()) {
            if (pipeline_from == "rca") {
                if (rca_opt.input.empty() || rca_opt.year == 0) {
                    throw ConfigError("pipeline needs --input and --year unless resumed");
                }
                if (const int code = cmd_rca(rca_opt); code != 0) return code;
            }
            if (pipeline_from == "rca" || pipeline_from == "complete") {
                if (const int code = cmd_complete(complete_opt); code != 0) return code;
            }
            return cmd_indices(indices_opt);
        }
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return 2;
    } catch (const EmptyInputError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
