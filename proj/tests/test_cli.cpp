#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ergsyn/dataset.hpp"

using namespace ergsyn;
namespace fs = std::filesystem;

namespace {

const char* kCli = ERGSYN_CLI_PATH;

fs::path fresh_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "ergsyn-cli" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(kCli) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void write_config(const fs::path& path, const std::string& body) {
    std::ofstream out(path);
    out << body;
}

std::string tiny_pipeline_config(const fs::path& outdir, int seed = 7) {
    std::ostringstream os;
    os << R"({
  "seed": )" << seed << R"(,
  "output_dir": ")" << outdir.string() << R"(",
  "dataset": {"oracle": {"n_per_cell": 12, "strength_indices": [0], "noise_std": 3.0}},
  "split": {"test_fraction": 0.25, "folds": 2},
  "gan": {"hidden": 4, "epochs": 2, "batch": 8, "checkpoint_every": 1, "holdback_fraction": 0.0},
  "tst": {"width": 8, "heads": 2, "layers": 1, "ff": 16, "max_epochs": 2, "patience": 2, "lr": 0.001},
  "generate": {"n_per_cell": 3},
  "evaluate": {"per_strength_rows": false, "n_synthetic_per_cell": 2},
  "plot": {"n_real": 2, "n_synthetic": 2}
})";
    return os.str();
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::size_t line_count(const fs::path& path) {
    std::ifstream in(path);
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) ++n;
    return n;
}

}  // namespace

TEST_SUITE("cli") {
    TEST_CASE("simulate with one record per cell writes 18 data rows") {
        const auto dir = fresh_dir("simulate18");
        const auto cfg = dir / "cfg.json";
        write_config(cfg, R"({"seed": 3, "output_dir": ")" + dir.string() +
                              R"(", "dataset": {"oracle": {"n_per_cell": 1}}})");
        REQUIRE(run_cli("-c " + cfg.string() + " simulate") == 0);
        CHECK(line_count(dir / "dataset.csv") == 19);  // header + 18 rows
        const Dataset d = load_dataset_csv(dir / "dataset.csv");
        CHECK(d.size() == 18);
        CHECK(d.manifest().size() == 18);
    }

    TEST_CASE("simulate is byte-identical across reruns of the same seed") {
        const auto dir_a = fresh_dir("sim-a");
        const auto dir_b = fresh_dir("sim-b");
        for (const auto& dir : {dir_a, dir_b}) {
            const auto cfg = dir / "cfg.json";
            write_config(cfg, R"({"seed": 11, "output_dir": ")" + dir.string() +
                                  R"(", "dataset": {"oracle": {"n_per_cell": 3}}})");
            REQUIRE(run_cli("-c " + cfg.string() + " simulate") == 0);
        }
        CHECK(slurp(dir_a / "dataset.csv") == slurp(dir_b / "dataset.csv"));
    }

    TEST_CASE("unknown configuration keys exit with the usage code") {
        const auto dir = fresh_dir("badkey");
        const auto cfg = dir / "cfg.json";
        write_config(cfg, R"({"seed": 3, "typo_key": 1})");
        CHECK(run_cli("-c " + cfg.string() + " simulate") == 1);
    }

    TEST_CASE("generate without a checkpoint exits with the data-error code") {
        const auto dir = fresh_dir("nockpt");
        const auto cfg = dir / "cfg.json";
        write_config(cfg, tiny_pipeline_config(dir));
        REQUIRE(run_cli("-c " + cfg.string() + " simulate") == 0);
        CHECK(run_cli("-c " + cfg.string() + " generate") == 2);
    }

    TEST_CASE("full tiny pipeline runs end to end with exit code zero") {
        const auto dir = fresh_dir("pipeline");
        const auto cfg = dir / "cfg.json";
        write_config(cfg, tiny_pipeline_config(dir));

        REQUIRE(run_cli("-c " + cfg.string() + " simulate") == 0);
        REQUIRE(run_cli("-c " + cfg.string() + " train-gan") == 0);
        CHECK(fs::exists(dir / "gan.ckpt"));
        CHECK(fs::exists(dir / "gan-best.ckpt"));

        REQUIRE(run_cli("-c " + cfg.string() + " generate") == 0);
        const Dataset synth = load_dataset_csv(dir / "synthetic.csv");
        CHECK(synth.size() == 6);  // 2 cells x 3
        for (const auto& r : synth.records) CHECK(r.provenance == Provenance::Synthetic);

        REQUIRE(run_cli("-c " + cfg.string() + " train-clf") == 0);
        CHECK(fs::exists(dir / "tst-fold0.ckpt"));
        CHECK(fs::exists(dir / "training-history.json"));

        REQUIRE(run_cli("-c " + cfg.string() + " evaluate") == 0);
        CHECK(fs::exists(dir / "report.md"));
        CHECK(fs::exists(dir / "report.kv"));

        REQUIRE(run_cli("-c " + cfg.string() + " plot") == 0);
        // 2 cells -> 2 overlays + 1 loss curve.
        std::size_t figures = 0;
        for (const auto& entry : fs::directory_iterator(dir / "figures")) {
            (void)entry;
            ++figures;
        }
        CHECK(figures == 3);
    }

    TEST_CASE("generate with zero requested waveforms writes a header-only CSV") {
        const auto dir = fresh_dir("genzero");
        const auto cfg = dir / "cfg.json";
        std::string body = tiny_pipeline_config(dir);
        body.replace(body.find("\"n_per_cell\": 3"), 15, "\"n_per_cell\": 0");
        write_config(cfg, body);
        REQUIRE(run_cli("-c " + cfg.string() + " simulate") == 0);
        REQUIRE(run_cli("-c " + cfg.string() + " train-gan") == 0);
        REQUIRE(run_cli("-c " + cfg.string() + " generate") == 0);
        CHECK(line_count(dir / "synthetic.csv") == 1);
    }
}
