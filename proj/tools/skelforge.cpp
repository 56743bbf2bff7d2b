#include <spdlog/spdlog.h>

#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"

#include "skelforge/cli.hpp"
#include "skelforge/service.hpp"

namespace {

void setup_logging() {
    const char* level = std::getenv("SKELFORGE_LOG");
    spdlog::set_level(level ? spdlog::level::from_str(level) : spdlog::level::warn);
    spdlog::set_pattern("[%l] %v");
}

}  // namespace

int main(int argc, char** argv) {
    setup_logging();
    CLI::App app{"skelforge: skeleton ground-truth toolkit"};
    app.require_subcommand(1);

    skelforge::JobConfig job;
    std::string select = "full";
    double tolerance = -1.0;

    auto ladder_flags = [&](CLI::App* cmd) {
        cmd->add_option("--kmin", job.k_min, "smallest DCE vertex count on the ladder")->capture_default_str();
        cmd->add_option("--kmax", job.k_max, "largest DCE vertex count on the ladder")->capture_default_str();
        cmd->add_flag("--fill-holes,!--keep-holes", job.fill_holes, "fill interior holes before skeletonizing");
    };

    auto* skel = app.add_subcommand("skeletonize", "build candidate ladders and GT records for a dataset");
    skel->add_option("--input", job.input, "dataset root")->required();
    skel->add_option("--output", job.output, "output directory")->required();
    skel->add_option("--workers", job.workers, "worker threads")->capture_default_str();
    skel->add_option("--select", select, "published step: full or auto")
        ->check(CLI::IsMember({"full", "auto"}))
        ->capture_default_str();
    ladder_flags(skel);

    auto* report = app.add_subcommand("report", "mean RE/SS per dataset over stored GT records");
    report->add_option("--input", job.input, "directory holding GT records")->required();
    report->add_option("--output", job.output, "where report.csv goes");
    report->add_option("--workers", job.workers, "worker threads")->capture_default_str();

    auto* eval = app.add_subcommand("eval", "AEP/F1 of predictions against GT, BES from a similarity matrix");
    eval->add_option("--input", job.input, "predicted skeletons")->required();
    eval->add_option("--gt", job.gt, "ground-truth skeletons")->required();
    eval->add_option("--output", job.output, "where eval.csv and eval.json go");
    eval->add_option("--tolerance", tolerance, "F1 match distance in pixels");
    eval->add_flag("--intersect", job.intersect, "evaluate only ids present on both sides");
    eval->add_option("--similarity", job.similarity, "N x N similarity CSV over GT ids in sorted order");
    eval->add_option("--per-class", job.per_class, "items per class for BES");
    eval->add_option("--workers", job.workers, "worker threads")->capture_default_str();

    auto* integ = app.add_subcommand("integrate", "consensus GT from several annotators' records");
    integ->add_option("--input", job.input, "directory of per-annotator GT records")->required();
    integ->add_option("--output", job.output, "consensus record directory")->required();

    auto* plot = app.add_subcommand("plot", "RE/SS curve of a ladder or session");
    plot->add_option("--input", job.input, "skeletonize item directory or session directory")->required();
    plot->add_option("--output", job.output, "PNG path or directory")->required();

    skelforge::ServiceConfig service_config;
    std::string host = "127.0.0.1";
    int port = 8080;
    auto* serve = app.add_subcommand("serve", "run the annotation HTTP service");
    serve->add_option("--input", service_config.dataset_root, "dataset root")->required();
    serve->add_option("--sessions", service_config.session_root, "session storage")->required();
    serve->add_option("--exports", service_config.export_root, "GT export root")->required();
    serve->add_option("--host", host)->capture_default_str();
    serve->add_option("--port", port)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : skelforge::kExitConfig;
    }
    job.select = select == "auto" ? skelforge::StepSelection::Auto : skelforge::StepSelection::Full;
    if (eval->count("--tolerance")) job.tolerance = tolerance;

    try {
        if (*skel) return skelforge::cmd_skeletonize(job);
        if (*report) return skelforge::cmd_report(job);
        if (*eval) return skelforge::cmd_eval(job);
        if (*integ) return skelforge::cmd_integrate(job);
        if (*plot) return skelforge::cmd_plot(job);
        skelforge::AnnotationService service(service_config);
        return skelforge::serve(service, host, port);
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return skelforge::kExitItemFailure;
    }
}
