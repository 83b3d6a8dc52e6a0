#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include <json.hpp>

#include "ecmc/csv.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kCli = ECMC_CLI_PATH;
const fs::path kFixtures = ECMC_FIXTURE_DIR;

int run_cli(const std::string& args, const fs::path& log) {
    const std::string command =
        "\"" + kCli + "\" " + args + " > \"" + log.string() + "\" 2>&1";
    const int status = std::system(command.c_str());
    REQUIRE(status != -1);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -2;
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("ecmc_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream stream(path, std::ios::binary);
    REQUIRE(stream.good());
    return {std::istreambuf_iterator<char>(stream), std::istreambuf_iterator<char>()};
}

std::string panel_pipeline_args(const fs::path& out, int reps, int seed, int threads) {
    return "pipeline --input \"" + (kFixtures / "trade_panel.csv").string() +
           "\" --population \"" + (kFixtures / "pop_panel.csv").string() +
           "\" --year 2018 --reps " + std::to_string(reps) + " --seed " +
           std::to_string(seed) + " --threads " + std::to_string(threads) +
           " --out \"" + out.string() + "\"";
}

}  // namespace

TEST_CASE("the pipeline runs end to end and writes every artifact") {
    const fs::path out = fresh_dir("pipeline");
    const int code = run_cli(panel_pipeline_args(out, 5, 42, 1), out / "run.log");
    CHECK(code == 0);

    for (const char* name :
         {"rca.csv", "discrete.csv", "abar.csv", "ahat.csv", "appearances.csv",
          "mbar.csv", "mhat.csv", "abar_t.csv", "ahat_t.csv", "appearances_t.csv",
          "mbar_t.csv", "mhat_t.csv", "rmse_records.csv", "rmse_records_t.csv",
          "rates.csv", "rates_t.csv", "money_scores.csv", "genepy.csv",
          "genepy_products.csv", "roc_global.csv", "roc_global.svg",
          "roc_overlay.svg", "confusion.csv", "diagnostics.txt",
          "evaluation_report.json", "manifest_rca.json", "manifest_complete.json",
          "manifest_indices.json"}) {
        CHECK_MESSAGE(fs::exists(out / name), name);
    }
    CHECK(fs::exists(out / "roc" / "roc_C01.csv"));
    CHECK(fs::exists(out / "roc" / "roc_C01.svg"));

    const auto report = nlohmann::json::parse(slurp(out / "evaluation_report.json"));
    CHECK(report["global_auc"].get<double>() > 0.5);
    CHECK(report["balanced_accuracy"].get<double>() > 0.5);

    // the discretized matrix separates the planted blocks
    const ecmc::LabeledMatrix discrete = ecmc::read_matrix_csv(out / "discrete.csv");
    CHECK(discrete.rows() == 12);
    CHECK(discrete.cols() == 10);
    CHECK(discrete.values(0, 0) >= 1.0);   // aligned block
    CHECK(discrete.values(0, 9) <= -1.0);  // off block
}

TEST_CASE("bad inputs exit with the usage code") {
    const fs::path out = fresh_dir("badinput");
    const std::string missing =
        "pipeline --input \"" + (out / "no_such.csv").string() + "\" --year 2018 --out \"" +
        out.string() + "\"";
    CHECK(run_cli(missing, out / "missing.log") == 2);

    const std::string empty_year =
        "pipeline --input \"" + (kFixtures / "trade_panel.csv").string() +
        "\" --year 1999 --out \"" + out.string() + "\"";
    CHECK(run_cli(empty_year, out / "year.log") == 2);

    CHECK(run_cli("pipeline --out \"" + out.string() + "\"", out / "noinput.log") == 2);
    CHECK(run_cli("rca --input x --year 2018 --out y --transform cube",
                  out / "flag.log") == 2);
}

TEST_CASE("equal seeds reproduce artifacts byte for byte") {
    const fs::path out_a = fresh_dir("seed_a");
    const fs::path out_b = fresh_dir("seed_b");
    REQUIRE(run_cli(panel_pipeline_args(out_a, 4, 7, 1), out_a / "run.log") == 0);
    // a different worker count must not change any output byte
    REQUIRE(run_cli(panel_pipeline_args(out_b, 4, 7, 2), out_b / "run.log") == 0);

    std::size_t compared = 0;
    for (const auto& entry : fs::recursive_directory_iterator(out_a)) {
        if (!entry.is_regular_file()) continue;
        const std::string name = entry.path().filename().string();
        if (name.rfind("manifest_", 0) == 0 || name == "run.log") continue;
        const fs::path relative = fs::relative(entry.path(), out_a);
        CAPTURE(relative.string());
        CHECK(slurp(entry.path()) == slurp(out_b / relative));
        ++compared;
    }
    CHECK(compared > 25);

    const fs::path out_c = fresh_dir("seed_c");
    REQUIRE(run_cli(panel_pipeline_args(out_c, 4, 8, 1), out_c / "run.log") == 0);
    CHECK(slurp(out_a / "abar.csv") != slurp(out_c / "abar.csv"));
}

TEST_CASE("a perfect counterfactual matches the observed complexity exactly") {
    const fs::path out = fresh_dir("perfect");
    REQUIRE(run_cli(panel_pipeline_args(out, 4, 11, 1), out / "run.log") == 0);

    // overwrite the majority surrogates with the observed incidence
    const ecmc::LabeledMatrix discrete = ecmc::read_matrix_csv(out / "discrete.csv");
    ecmc::LabeledMatrix truth = ecmc::make_labeled_matrix(
        "country", discrete.row_labels, discrete.col_labels);
    ecmc::LabeledMatrix truth_t = ecmc::make_labeled_matrix(
        "product", discrete.col_labels, discrete.row_labels);
    for (Eigen::Index r = 0; r < discrete.rows(); ++r) {
        for (Eigen::Index c = 0; c < discrete.cols(); ++c) {
            const double one =
                (discrete.present(r, c) && discrete.values(r, c) > 0.0) ? 1.0 : 0.0;
            truth.values(r, c) = one;
            truth_t.values(c, r) = one;
        }
    }
    ecmc::write_matrix_csv(out / "mhat.csv", truth);
    ecmc::write_matrix_csv(out / "mhat_t.csv", truth_t);

    REQUIRE(run_cli("indices --out \"" + out.string() + "\"", out / "indices.log") == 0);

    const ecmc::CsvTable genepy = ecmc::read_csv(out / "genepy.csv");
    REQUIRE(genepy.header.size() == 6);
    CHECK(genepy.header[3] == "difference");
    REQUIRE(genepy.rows.size() == 12);
    for (const auto& row : genepy.rows) {
        CHECK(row[3] == "0");
    }
    const auto report = nlohmann::json::parse(slurp(out / "evaluation_report.json"));
    const auto& tau = report["correlations"]["genepy_vs_counterfactual"]["tau"];
    REQUIRE(tau.is_number());
    CHECK(tau.get<double>() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("stages resume from intermediate artifacts") {
    const fs::path out = fresh_dir("resume");
    REQUIRE(run_cli(panel_pipeline_args(out, 3, 5, 1), out / "run.log") == 0);
    const std::string before = slurp(out / "genepy.csv");
    CHECK(run_cli("pipeline --from indices --out \"" + out.string() + "\"",
                  out / "resume.log") == 0);
    CHECK(slurp(out / "genepy.csv") == before);
}

TEST_CASE("the version flag reports the tool version") {
    const fs::path out = fresh_dir("version");
    CHECK(run_cli("--version", out / "version.log") == 0);
    CHECK(slurp(out / "version.log").find("0.1.0") != std::string::npos);
}

TEST_CASE("config files supply option values") {
    const fs::path out = fresh_dir("config");
    const std::string rca_args =
        "rca --input \"" + (kFixtures / "trade_panel.csv").string() +
        "\" --year 2018 --out \"" + out.string() + "\"";
    REQUIRE(run_cli(rca_args, out / "rca.log") == 0);

    const fs::path config = out / "settings.ini";
    std::ofstream(config) << "[complete]\nreps=3\nseed=19\n";
    const std::string complete_args = "--config \"" + config.string() +
                                      "\" complete --out \"" + out.string() + "\"";
    REQUIRE(run_cli(complete_args, out / "complete.log") == 0);

    const auto manifest = nlohmann::json::parse(slurp(out / "manifest_complete.json"));
    CHECK(manifest["config"]["reps"].get<std::string>() == "3");
    CHECK(manifest["config"]["seed"].get<std::string>() == "19");
}
