// Command-line front end: simulate | run | diffuse | report.
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gsm/config.hpp"
#include "gsm/errors.hpp"
#include "gsm/pipeline.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    long long seed = -1;
    int workers = 0;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--config", o.config_path, "Config file (key = value)");
    cmd->add_option("--out", o.out_dir, "Output directory override");
    cmd->add_option("--seed", o.seed, "Seed override");
    cmd->add_option("--workers", o.workers, "Worker thread count override");
}

gsm::config::PipelineConfig resolve(const CommonOpts& o) {
    gsm::config::PipelineConfig cfg;
    if (!o.config_path.empty()) cfg = gsm::config::load_config(o.config_path);
    if (!o.out_dir.empty()) cfg.out_dir = o.out_dir;
    if (o.seed >= 0) cfg.seed = static_cast<std::uint64_t>(o.seed);
    if (o.workers > 0) cfg.workers = o.workers;
    cfg.validate();
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"geometric-stochastic multimodal toolkit"};
    app.require_subcommand(1);

    CommonOpts sim_o, run_o, dif_o;
    auto* sim = app.add_subcommand("simulate", "synthesize a labeled cohort");
    add_common(sim, sim_o);
    auto* run = app.add_subcommand("run", "full pipeline on a cohort manifest");
    add_common(run, run_o);
    std::string run_manifest;
    run->add_option("--manifest", run_manifest, "Cohort manifest override");
    auto* dif = app.add_subcommand("diffuse", "brainstem-seeded risk cascade");
    add_common(dif, dif_o);

    auto* rep = app.add_subcommand("report", "merge metrics from prior runs");
    std::vector<std::string> rep_inputs;
    std::string rep_out = "out";
    bool rep_force = false;
    rep->add_option("inputs", rep_inputs, "metrics.json files")->required();
    rep->add_option("--out", rep_out, "Output directory");
    rep->add_flag("--force", rep_force, "Merge despite config hash mismatch");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) {
            const auto manifest = gsm::pipeline::cmd_simulate(resolve(sim_o));
            std::printf("manifest: %s\n", manifest.string().c_str());
        } else if (run->parsed()) {
            auto cfg = resolve(run_o);
            if (!run_manifest.empty()) cfg.manifest = run_manifest;
            const auto res = gsm::pipeline::cmd_run(cfg);
            std::printf("config %s seed %llu  train %d / test %d\n",
                        res.config_hash.c_str(),
                        static_cast<unsigned long long>(res.seed), res.n_train,
                        res.n_test);
            std::printf("heldout  auc %.4f  acc %.4f  f1 %.4f\n",
                        res.heldout.auc, res.heldout.acc, res.heldout.f1);
            std::printf("baseline auc %.4f\n", res.baseline_heldout.auc);
        } else if (dif->parsed()) {
            const auto cfg = resolve(dif_o);
            const auto res = gsm::pipeline::cmd_diffuse(cfg);
            std::printf("trajectory: %zu states over %d regions\n",
                        res.trajectory.size(), int(res.labels.size()));
        } else if (rep->parsed()) {
            std::vector<std::filesystem::path> files(rep_inputs.begin(),
                                                     rep_inputs.end());
            const auto res =
                gsm::pipeline::cmd_report(files, rep_out, rep_force);
            std::printf("%d runs  mean auc %.4f  acc %.4f  f1 %.4f\n",
                        res.n_runs, res.mean_auc, res.mean_acc, res.mean_f1);
        }
    } catch (const gsm::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const gsm::DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return kExitData;
    } catch (const gsm::NumericError& e) {
        std::fprintf(stderr, "numeric error: %s\n", e.what());
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
