// Command-line front end: corpus generation, training, evaluation, the HTTP
// service, and a scenario driver that plays a patient against a live server.

#include <CLI11.hpp>
#include <httplib.h>
#include <signal.h>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <thread>

#include "strokesave/http_api.hpp"
#include "strokesave/service.hpp"
#include "strokesave/synth.hpp"
#include "strokesave/training.hpp"

using namespace strokesave;
using nlohmann::json;

namespace {

synth::CorpusModality modality_arg(const std::string& s) {
    const auto m = synth::parse_corpus_modality(s);
    if (!m) throw CLI::ValidationError("--modality", "unknown modality '" + s + "'");
    return *m;
}

const std::vector<std::string> kModalities{"vocal", "retina", "face", "vascular", "fusion"};

void write_text(const std::filesystem::path& p, const std::string& text) {
    synth::write_bytes(p, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

metrics::ReportRow row_for(synth::CorpusModality m, const metrics::ConfusionMatrix& cm) {
    return {training::report_label(m), metrics::compute_metrics(cm)};
}

int run_gen(const std::string& modality, std::optional<std::size_t> n, double difficulty, std::uint64_t seed,
            const std::string& out) {
    const std::vector<std::string> which = modality == "all" ? kModalities : std::vector<std::string>{modality};
    for (const auto& name : which) {
        synth::CorpusSpec spec;
        spec.modality = modality_arg(name);
        spec.n_per_class = n.value_or(training::default_n_per_class(spec.modality));
        spec.difficulty = difficulty;
        spec.seed = seed;
        const auto manifest = synth::write_corpus(spec, out);
        std::printf("%s: wrote %zu items to %s\n", name.c_str(), manifest.entries.size(),
                    (std::filesystem::path(out) / name).c_str());
    }
    return 0;
}

int run_train(const std::string& modality, const std::string& data, const std::string& out,
              std::optional<std::size_t> epochs, std::optional<double> lr, std::optional<double> clip, std::uint64_t seed,
              const std::string& report_json, bool quiet) {
    const auto m = modality_arg(modality);
    training::TrainOptions opt = training::default_options(m);
    if (epochs) opt.epochs = *epochs;
    if (lr) opt.learning_rate = *lr;
    if (clip) opt.clip_norm = *clip;
    opt.seed = seed;
    const auto report = training::train_modality(m, data, out, opt, [quiet](const std::string& s) {
        if (!quiet) std::fprintf(stderr, "%s\n", s.c_str());
    });
    std::printf("%s: trained on %zu, held-out %zu, train accuracy %.4f, held-out accuracy %.4f, %.1f s -> %s\n",
                modality.c_str(), report.train_count, report.test_count, report.train_accuracy,
                report.test_accuracy(), report.seconds, out.c_str());
    const metrics::ReportRow row = row_for(m, report.held_out);
    std::printf("%s", metrics::format_table(std::span(&row, 1)).c_str());
    if (!report_json.empty()) {
        const json j = {{"modality", modality},
                        {"train_count", report.train_count},
                        {"test_count", report.test_count},
                        {"train_accuracy", report.train_accuracy},
                        {"test_accuracy", report.test_accuracy()},
                        {"seconds", report.seconds},
                        {"confusion",
                         {{"tp", report.held_out.tp},
                          {"fp", report.held_out.fp},
                          {"fn", report.held_out.fn},
                          {"tn", report.held_out.tn}}}};
        write_text(report_json, j.dump(2) + "\n");
    }
    return 0;
}

int run_eval(const std::string& modality, const std::string& data, const std::string& model, bool all,
             const std::string& report_csv) {
    std::vector<metrics::ReportRow> rows;
    const std::vector<std::string> which = modality == "all" ? kModalities : std::vector<std::string>{modality};
    for (const auto& name : which) {
        const auto m = modality_arg(name);
        // With "all", --model names the models directory.
        const std::filesystem::path path =
            modality == "all" ? std::filesystem::path(model) / service::model_file_name(name) : std::filesystem::path(model);
        const auto r = training::evaluate_modality(m, data, path, !all);
        rows.push_back(row_for(m, r.confusion));
    }
    std::printf("%s", metrics::format_table(rows).c_str());
    if (!report_csv.empty()) write_text(report_csv, metrics::format_csv(rows));
    return 0;
}

int run_serve(const std::string& host, int port, const std::string& models, const std::string& store,
              const std::string& port_file) {
    // Block the stop signals before any thread starts so only the waiter sees them.
    sigset_t stop_signals;
    sigemptyset(&stop_signals);
    sigaddset(&stop_signals, SIGINT);
    sigaddset(&stop_signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &stop_signals, nullptr);

    service::ServiceOptions opts;
    opts.store_dir = store;
    service::ScreeningService svc(opts, service::load_detectors(models));
    service::ApiServer api(svc);
    const int bound = api.bind(host, port);
    if (!port_file.empty()) write_text(port_file, std::to_string(bound) + "\n");
    std::fprintf(stderr, "serving on http://%s:%d (models %s, %zu recovered sessions)\n", host.c_str(), bound,
                 svc.detectors().model_version.c_str(), svc.session_ids().size());

    std::thread waiter([&] {
        int sig = 0;
        sigwait(&stop_signals, &sig);
        api.stop();
    });
    api.listen();
    // listen() also returns if the server fails; make sure the waiter exits.
    pthread_kill(waiter.native_handle(), SIGTERM);
    waiter.join();
    return 0;
}

std::filesystem::path first_positive(const std::filesystem::path& corpus, synth::CorpusModality m, std::size_t pick) {
    const auto manifest = synth::read_manifest(corpus, m);
    std::size_t seen = 0;
    for (const auto& e : manifest.entries) {
        if (e.positive && seen++ == pick) return e.path;
    }
    throw std::runtime_error("no positive " + std::string(synth::to_string(m)) + " item in " + corpus.string());
}

json must_json(const httplib::Result& r, const std::string& what, int expected = 200) {
    if (!r) throw std::runtime_error(what + ": " + httplib::to_string(r.error()));
    if (r->status != expected) {
        throw std::runtime_error(what + ": HTTP " + std::to_string(r->status) + " " + r->body);
    }
    return json::parse(r->body);
}

json post_capture(httplib::Client& c, const std::string& id, const std::string& kind,
                  const std::filesystem::path& file) {
    const auto bytes = synth::read_bytes(file);
    return must_json(c.Post("/v1/sessions/" + id + "/capture/" + kind, std::string(bytes.begin(), bytes.end()),
                            "application/octet-stream"),
                     "capture " + kind);
}

int run_simulate(const std::string& scenario, double rate, const std::string& target, std::size_t samples,
                 std::uint64_t seed, double difficulty, const std::string& captures, std::size_t pick) {
    if (scenario != "normal" && scenario != "stroke") throw CLI::ValidationError("--scenario", "normal or stroke");
    if (!(rate > 0)) throw CLI::ValidationError("--rate", "must be positive");
    httplib::Client c(target);
    c.set_read_timeout(60, 0);
    const std::string id = must_json(c.Post("/v1/sessions"), "create session", 201).at("session_id");
    std::fprintf(stderr, "session %s\n", id.c_str());

    synth::Rng rng(seed);
    const auto stream = synth::make_vitals_stream(rng, scenario == "stroke", difficulty, samples);
    const auto period = std::chrono::duration<double>(1.0 / rate);
    json last;
    bool alerted = false;
    for (std::size_t i = 0; i < stream.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        last = must_json(c.Post("/v1/sessions/" + id + "/vitals", session::sample_to_json(stream[i]).dump(),
                                "application/json"),
                         "vitals");
        if (!alerted && !last.at("alert").is_null()) {
            alerted = true;
            std::fprintf(stderr, "alert after sample %zu: %s\n", i, last.at("alert").dump().c_str());
        }
        std::this_thread::sleep_until(t0 + std::chrono::duration_cast<std::chrono::steady_clock::duration>(period));
    }

    if (!captures.empty() && last.at("state") == "ALERT") {
        const std::filesystem::path root = captures;
        // Tier order: voice and face, then the retina image.
        post_capture(c, id, "voice", first_positive(root, synth::CorpusModality::vocal, pick));
        post_capture(c, id, "face", first_positive(root, synth::CorpusModality::face, pick));
        post_capture(c, id, "retina", first_positive(root, synth::CorpusModality::retina, pick));
    }
    json summary = must_json(c.Get("/v1/sessions/" + id), "session");
    summary.erase("events");
    std::printf("%s\n", summary.dump().c_str());
    return 0;
}

int run_capture(const std::string& target, const std::string& id, const std::string& kind, const std::string& file) {
    httplib::Client c(target);
    c.set_read_timeout(60, 0);
    std::printf("%s\n", post_capture(c, id, kind, file).dump().c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"StrokeSave screening pipeline"};
    app.require_subcommand(1);

    std::string modality, data, out, model, store, target, scenario, captures, report, host = "127.0.0.1", port_file,
                                                                                   session_id, kind, file;
    std::optional<std::size_t> n, epochs;
    std::optional<double> lr, clip;
    double difficulty = 0.3, rate = 5.0;
    std::uint64_t seed = 1;
    std::size_t samples = 60, pick = 0;
    int port = 8080;
    bool all = false, quiet = false;

    auto* gen = app.add_subcommand("gen", "write a synthetic labelled corpus");
    gen->add_option("--modality", modality, "vocal|retina|face|vascular|fusion|all")->required();
    gen->add_option("--n", n, "items per class (default: the standard split size)");
    gen->add_option("--difficulty", difficulty, "class overlap in [0, 1]");
    gen->add_option("--seed", seed);
    gen->add_option("--out", out, "corpus root directory")->required();

    auto* train = app.add_subcommand("train", "train one model on a corpus");
    train->add_option("--modality", modality)->required();
    train->add_option("--data", data, "corpus root or modality directory")->required();
    train->add_option("--out", out, "model file to write")->required();
    train->add_option("--epochs", epochs);
    train->add_option("--lr", lr);
    train->add_option("--clip", clip, "gradient norm bound for the networks (0 = off)");
    train->add_option("--seed", seed);
    train->add_option("--report-json", report, "also write the training summary as JSON");
    train->add_flag("--quiet", quiet, "no per-epoch progress");

    auto* eval = app.add_subcommand("eval", "score a model and print the metrics table");
    eval->add_option("--modality", modality, "a modality, or all")->required();
    eval->add_option("--data", data)->required();
    eval->add_option("--model", model, "model file, or the models directory with --modality all")->required();
    eval->add_flag("--all-items", all, "score every item instead of the held-out split");
    eval->add_option("--report", report, "write the rows as CSV");

    auto* serve = app.add_subcommand("serve", "run the HTTP API");
    serve->add_option("--host", host);
    serve->add_option("--port", port, "0 picks a free port");
    serve->add_option("--models", model, "directory with <modality>.model files")->required();
    serve->add_option("--store", store, "event log and blob directory")->required();
    serve->add_option("--port-file", port_file, "write the bound port here");

    auto* sim = app.add_subcommand("simulate", "drive one live session against a server");
    sim->add_option("--scenario", scenario, "normal|stroke")->required();
    sim->add_option("--rate", rate, "vitals samples per second");
    sim->add_option("--target", target, "server URL, e.g. http://127.0.0.1:8080")->required();
    sim->add_option("--samples", samples, "vitals samples to send");
    sim->add_option("--seed", seed);
    sim->add_option("--difficulty", difficulty, "vitals overlap; 0 gives textbook readings")->default_val(0.0);
    sim->add_option("--captures", captures, "corpus root; after an alert, upload positive voice, face, retina");
    sim->add_option("--pick", pick, "which positive item of each corpus to upload");

    auto* cap = app.add_subcommand("capture", "upload one capture file to a session");
    cap->add_option("--target", target)->required();
    cap->add_option("--session", session_id)->required();
    cap->add_option("--kind", kind, "voice|face|retina")->required();
    cap->add_option("--file", file)->required();

    CLI11_PARSE(app, argc, argv);
    try {
        if (*gen) return run_gen(modality, n, difficulty, seed, out);
        if (*train) return run_train(modality, data, out, epochs, lr, clip, seed, report, quiet);
        if (*eval) return run_eval(modality, data, model, all, report);
        if (*serve) return run_serve(host, port, model, store, port_file);
        if (*sim) return run_simulate(scenario, rate, target, samples, seed, difficulty, captures, pick);
        if (*cap) return run_capture(target, session_id, kind, file);
    } catch (const CLI::Error& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
