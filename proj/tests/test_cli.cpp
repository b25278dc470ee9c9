#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gsm/config.hpp"
#include "gsm/errors.hpp"
#include "gsm/pipeline.hpp"

using namespace gsm;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

}  // namespace

TEST_CASE("config round-trip, canonical hash, validation") {
    const auto dir = scratch_dir("gsm_cli_cfg");
    config::PipelineConfig cfg;
    cfg.n_subjects = 12;
    cfg.effect_size = 1.25;
    cfg.seed = 42;
    config::save_config(dir / "a.cfg", cfg);
    const auto back = config::load_config(dir / "a.cfg");
    CHECK(back.n_subjects == 12);
    CHECK(back.effect_size == doctest::Approx(1.25));
    CHECK(back.seed == 42);
    CHECK(back.hash_hex() == cfg.hash_hex());

    config::PipelineConfig other = cfg;
    other.seed = 43;
    CHECK(other.hash_hex() != cfg.hash_hex());

    // unknown key rejected with a line number
    std::ofstream(dir / "bad.cfg") << "[cohort]\nn_subjects = 8\nbogus = 1\n";
    try {
        config::load_config(dir / "bad.cfg");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find(":3") != std::string::npos);
        CHECK(std::string(e.what()).find("bogus") != std::string::npos);
    }

    std::ofstream(dir / "neg.cfg") << "[diffusion]\nalpha = 1.5\n";
    CHECK_THROWS_AS(config::load_config(dir / "neg.cfg"), ConfigError);
    CHECK_THROWS_AS(config::load_config(dir / "missing.cfg"), ConfigError);
    fs::remove_all(dir);
}

TEST_CASE("simulate writes a complete manifest; seeds change content") {
    const auto dir = scratch_dir("gsm_cli_sim");
    config::PipelineConfig cfg;
    cfg.n_subjects = 4;
    cfg.effect_size = 0.5;
    cfg.out_dir = dir / "a";
    cfg.seed = 5;
    const auto manifest = pipeline::cmd_simulate(cfg);
    const auto entries = signals::read_manifest(manifest);
    REQUIRE(entries.size() == 4);
    for (const auto& e : entries) {
        CHECK(e.files.size() == 6);
        for (const auto& [m, p] : e.files) CHECK(fs::exists(p));
    }

    cfg.out_dir = dir / "b";
    cfg.seed = 6;
    const auto manifest2 = pipeline::cmd_simulate(cfg);
    const auto e2 = signals::read_manifest(manifest2);
    CHECK(slurp(entries[0].files.begin()->second) !=
          slurp(e2[0].files.begin()->second));
    fs::remove_all(dir);
}

TEST_CASE("run emits provenance-stamped reports, byte-stable on rerun") {
    const auto dir = scratch_dir("gsm_cli_run");
    config::PipelineConfig cfg;
    cfg.n_subjects = 12;
    cfg.effect_size = 2.0;
    cfg.epochs = 40;
    cfg.out_dir = dir;
    cfg.seed = 17;
    pipeline::cmd_simulate(cfg);
    const auto res = pipeline::cmd_run(cfg);
    CHECK(res.n_train + res.n_test == 12);
    CHECK(res.config_hash == cfg.hash_hex());
    REQUIRE(fs::exists(dir / "biomarker_report.json"));
    REQUIRE(fs::exists(dir / "metrics.json"));
    REQUIRE(fs::exists(dir / "attention_weights.csv"));
    for (const auto& s : res.subjects) {
        CHECK(std::isfinite(s.latent_energy_entropy));
        CHECK(std::isfinite(s.attention_entropy));
        CHECK(s.model_prob > 0.0);
        CHECK(s.model_prob < 1.0);
        CHECK(s.composite_risk >= 0.0);
        CHECK(s.composite_risk <= 1.0);
    }
    const std::string bio = slurp(dir / "biomarker_report.json");
    const std::string met = slurp(dir / "metrics.json");
    CHECK(bio.find(cfg.hash_hex()) != std::string::npos);

    pipeline::cmd_run(cfg);
    CHECK(slurp(dir / "biomarker_report.json") == bio);
    CHECK(slurp(dir / "metrics.json") == met);

    // missing manifest surfaces as a data error
    config::PipelineConfig gone = cfg;
    gone.manifest = dir / "nope" / "manifest.json";
    CHECK_THROWS_AS(pipeline::cmd_run(gone), DataError);
    fs::remove_all(dir);
}

TEST_CASE("diffuse: brainstem-seeded ordering and outputs") {
    const auto dir = scratch_dir("gsm_cli_diff");
    config::PipelineConfig cfg;
    cfg.out_dir = dir;
    const auto res = pipeline::cmd_diffuse(cfg);
    REQUIRE(fs::exists(dir / "risk_trajectory.csv"));
    REQUIRE(fs::exists(dir / "centrality.json"));
    REQUIRE(res.labels.size() == 16);

    std::vector<int> brainstem, cortical;
    for (int i = 0; i < 16; ++i) {
        const auto& l = res.labels[i];
        if (l.find("Cortex") != std::string::npos) cortical.push_back(i);
        else if (l.find("Nucle") != std::string::npos ||
                 l.find("Coeruleus") != std::string::npos ||
                 l.find("Raphe") != std::string::npos ||
                 l.find("Hypothalamus") != std::string::npos)
            brainstem.push_back(i);
    }
    REQUIRE(brainstem.size() == 5);
    auto mean_over = [&](const Eigen::VectorXd& x,
                         const std::vector<int>& idx) {
        double a = 0.0;
        for (int i : idx) a += x[i];
        return a / double(idx.size());
    };
    // Early on the seeded brainstem dominates; cortical regions start at
    // zero and catch up as the cascade spreads.
    const auto& early = res.trajectory[res.trajectory.size() / 50];
    const auto& late = res.trajectory.back();
    const double bs_early = mean_over(early.x, brainstem);
    const double cx_early = mean_over(early.x, cortical);
    const double cx_late = mean_over(late.x, cortical);
    CHECK(bs_early > cx_early);
    CHECK(cx_late > cx_early);
    fs::remove_all(dir);
}

TEST_CASE("report merges runs, recomputes means, guards config hashes") {
    const auto dir = scratch_dir("gsm_cli_rep");
    config::PipelineConfig cfg;
    cfg.n_subjects = 10;
    cfg.effect_size = 1.5;
    cfg.epochs = 30;
    cfg.out_dir = dir / "r1";
    cfg.seed = 1;
    pipeline::cmd_simulate(cfg);
    const auto r1 = pipeline::cmd_run(cfg);

    config::PipelineConfig cfg2 = cfg;
    cfg2.out_dir = dir / "r2";
    cfg2.seed = 2;
    pipeline::cmd_simulate(cfg2);
    const auto r2 = pipeline::cmd_run(cfg2);

    // same config hash except paths/seed differ -> mismatch guard
    CHECK_THROWS_AS(pipeline::cmd_report({dir / "r1" / "metrics.json",
                                          dir / "r2" / "metrics.json"},
                                         dir / "sum", false),
                    DataError);
    const auto sum = pipeline::cmd_report({dir / "r1" / "metrics.json",
                                           dir / "r2" / "metrics.json"},
                                          dir / "sum", true);
    CHECK(sum.n_runs == 2);
    CHECK(sum.mean_auc ==
          doctest::Approx((r1.heldout.auc + r2.heldout.auc) / 2.0));
    CHECK(sum.mean_acc ==
          doctest::Approx((r1.heldout.acc + r2.heldout.acc) / 2.0));
    REQUIRE(fs::exists(dir / "sum" / "summary.json"));

    CHECK_THROWS_AS(pipeline::cmd_report({dir / "absent.json"}, dir / "sum"),
                    DataError);
    CHECK_THROWS_AS(pipeline::cmd_report({}, dir / "sum"), DataError);
    fs::remove_all(dir);
}
