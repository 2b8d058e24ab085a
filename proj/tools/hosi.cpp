// hosi: estimate, check and decompose higher-order Sobol' indices.
//
//   hosi estimate  --function 'gfunction:a=0,1,9' --p 4 --subsets all
//   hosi compare   --function 'rect:eps=0.1,0.2' --p 4 --n 100000
//   hosi transform --function 'product:linear(0.5),linear(0.3)' --subsets all
//   hosi p3-report
//
// Exit codes: 0 ok, 1 runtime error, 2 bad configuration, 3 compare failed.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "hosi/cli/run.hpp"

namespace {

void add_run_options(CLI::App* sub, hosi::cli::RunConfig& cfg, bool sampling) {
    sub->add_option("-f,--function", cfg.function, "function spec, e.g. rect:eps=0.1,0.2")->required();
    sub->add_option("--p", cfg.p, "index order (2..8)");
    sub->add_option("--family", cfg.family, "moment | fourier | walsh");
    sub->add_option("--base", cfg.base, "Walsh base b");
    sub->add_option("--estimator", cfg.estimator, "difference | centered | total (moment); full | reduced (spectral)");
    sub->add_option("--subsets", cfg.subsets, "all | singletons | pairs | {1,3};{2}");
    sub->add_option("--dim", cfg.dim, "input dimension of an extern: function");
    sub->add_option("--format", cfg.format, "csv | json");
    sub->add_option("--out", cfg.out, "output path (default stdout)");
    if (!sampling) return;
    sub->add_option("--n", cfg.n, "replicates per subset");
    sub->add_option("--seed", cfg.seed, "run seed");
    sub->add_option("--workers", cfg.workers, "worker threads");
    sub->add_option("--sampler", cfg.sampler, "mc | lattice");
    sub->add_option("--timeout", cfg.timeout, "external evaluator timeout per batch, seconds");
}

int write_output(const std::string& text, const std::string& path) {
    if (path.empty()) {
        std::cout << text << std::flush;
        return 0;
    }
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) {
        std::cerr << "hosi: cannot write " << path << '\n';
        return 1;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Higher-order Sobol' index estimation"};
    app.require_subcommand(1);

    hosi::cli::RunConfig cfg;
    auto* estimate = app.add_subcommand("estimate", "Monte Carlo / QMC estimates");
    auto* oracle = app.add_subcommand("oracle", "exact values for oracle-capable functions");
    auto* compare = app.add_subcommand("compare", "estimates against oracle values, with z-scores");
    auto* transform = app.add_subcommand("transform", "Moebius components of cumulative estimates");
    add_run_options(estimate, cfg, true);
    add_run_options(oracle, cfg, false);
    add_run_options(compare, cfg, true);
    add_run_options(transform, cfg, true);
    compare->add_option("--z-max", cfg.z_max, "fail when any |z| exceeds this");

    std::uint64_t p3_seed = 1;
    int p3_instances = 10;
    std::string p3_out;
    auto* p3 = app.add_subcommand("p3-report", "which constant the additive p=3 table needs, by brute force");
    p3->add_option("--seed", p3_seed);
    p3->add_option("--instances", p3_instances);
    p3->add_option("--out", p3_out);

    CLI11_PARSE(app, argc, argv);

    try {
        if (p3->parsed()) {
            const auto rep = hosi::resolve_additive_p3_discrepancy(p3_seed, p3_instances);
            const int rc = write_output(rep.to_text(), p3_out);
            return rc != 0 ? rc : (rep.consistent ? 0 : 3);
        }
        if (estimate->parsed()) cfg.command = hosi::cli::Command::estimate;
        else if (oracle->parsed()) cfg.command = hosi::cli::Command::oracle;
        else if (compare->parsed()) cfg.command = hosi::cli::Command::compare;
        else cfg.command = hosi::cli::Command::transform;

        hosi::cli::PreparedRun run;
        try {
            run = hosi::cli::prepare(cfg);
        } catch (const hosi::Error& e) {
            std::cerr << "hosi: " << e.what() << '\n';
            return 2;
        }
        const auto outcome = hosi::cli::execute(run);
        for (const auto& note : outcome.report.notes) std::cerr << "hosi: note: " << note << '\n';
        const int rc = write_output(hosi::cli::render(outcome.report, cfg.format), cfg.out);
        return rc != 0 ? rc : outcome.exit_code;
    } catch (const hosi::cli::ConfigError& e) {
        std::cerr << "hosi: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "hosi: " << e.what() << '\n';
        return 1;
    }
}
