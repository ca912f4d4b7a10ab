/*
    Copyright 2026 The stepcorr Authors

    Licensed under the Apache License, Version 2.0 (the "License");
    you may not use this file except in compliance with the License.
    You may obtain a copy of the License at

        https://www.apache.org/licenses/LICENSE-2.0

    Unless required by applicable law or agreed to in writing, software
    distributed under the License is distributed on an "AS IS" BASIS,
    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
    See the License for the specific language governing permissions and
    limitations under the License.
*/
// stepcorr command line. Talks to the library only through the C interface.
//
// Exit codes: 0 success, 1 invalid input or configuration, 2 runtime failure.

#include <stepcorr/stepcorr.h>

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

int exit_code(sc_status status) {
    if (status == SC_OK) return 0;
    if (status == SC_ERR_INVALID_ARGUMENT || status == SC_ERR_PARSE) return 1;
    return 2;
}

int report(sc_status status, const char* command) {
    if (status != SC_OK) {
        std::cerr << "stepcorr " << command << ": " << sc_status_name(status) << ": " << sc_last_error() << '\n';
    }
    return exit_code(status);
}

// Prints and frees a library-owned string.
void emit(char* text, std::ostream& out = std::cout) {
    if (!text) return;
    out << text;
    if (*text && text[std::char_traits<char>::length(text) - 1] != '\n') out << '\n';
    sc_string_free(text);
}

const char* opt_c_str(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

sc_compare_mode compare_mode(const std::string& s) {
    return (s == "after" || s == "literal") ? SC_COMPARE_UPDATE_FIRST : SC_COMPARE_BEFORE_UPDATE;
}
sc_forecast_mode forecast_mode(const std::string& s) {
    return s == "from-current" ? SC_FORECAST_FROM_CURRENT : SC_FORECAST_MARGINAL;
}
sc_bound_policy bound_policy(const std::string& s) {
    return s == "lowest-index" ? SC_BOUND_LOWEST_INDEX : SC_BOUND_RANDOM;
}
sc_engine engine_of(const std::string& s) { return s == "pm" ? SC_ENGINE_PM : SC_ENGINE_STEPWISE; }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"stepcorr: change detection and stepwise event correlation over numeric streams"};
    app.set_version_flag("--version", std::string(sc_version()));
    app.require_subcommand(1);

    std::optional<int> rc;

    // generate ---------------------------------------------------------------
    auto* gen = app.add_subcommand("generate", "synthesize streams with injected changes from a JSON spec");
    std::string gen_spec, gen_out, gen_truth;
    std::optional<std::uint64_t> gen_seed;
    gen->add_option("--spec", gen_spec, "generator spec (JSON)")->required()->check(CLI::ExistingFile);
    gen->add_option("-o,--out", gen_out, "output stream CSV")->required();
    gen->add_option("--truth", gen_truth, "ground-truth CSV of injected changes");
    gen->add_option("--seed", gen_seed, "root seed; overrides the seed in the spec file");
    gen->callback([&] {
        rc = report(sc_cmd_generate(gen_spec.c_str(), gen_out.c_str(), opt_c_str(gen_truth), gen_seed ? 1 : 0,
                                    gen_seed.value_or(0)),
                    "generate");
    });

    // detect -----------------------------------------------------------------
    auto* det = app.add_subcommand("detect", "run one Shewhart detector per stream");
    std::string det_in, det_out, det_format = "csv", det_align = "strict", det_on_error = "abort", det_streams,
                                 det_mode = "before";
    double det_tightness = 3.0;
    std::uint64_t det_warmup = 25;
    det->add_option("-i,--input", det_in, "input readings")->required()->check(CLI::ExistingFile);
    det->add_option("-o,--out", det_out, "output event CSV")->required();
    det->add_option("--format", det_format)->check(CLI::IsMember({"csv", "ndjson"}));
    det->add_option("--align", det_align)->check(CLI::IsMember({"strict", "hold"}));
    det->add_option("--on-error", det_on_error)->check(CLI::IsMember({"skip", "abort"}));
    det->add_option("--streams", det_streams, "comma-separated stream names (default: from the input)");
    det->add_option("--tightness", det_tightness, "control-limit width in standard deviations");
    det->add_option("--warmup", det_warmup, "samples absorbed before any signal");
    det->add_option("--mode", det_mode, "compare before or after absorbing the sample")
        ->check(CLI::IsMember({"before", "after", "literal"}));
    det->callback([&] {
        sc_detect_options o{det_in.c_str(),     det_out.c_str(),  det_format.c_str(),
                            det_align.c_str(),  det_on_error.c_str(), opt_c_str(det_streams),
                            det_tightness,      det_warmup,       compare_mode(det_mode)};
        char* summary = nullptr;
        rc = report(sc_cmd_detect(&o, &summary), "detect");
        emit(summary, std::cerr);
    });

    // correlate --------------------------------------------------------------
    auto* cor = app.add_subcommand("correlate", "build or update a correlation model from an event CSV");
    std::string cor_events, cor_model, cor_engine = "stepwise", cor_bound = "random";
    bool cor_update = false;
    std::size_t cor_k = 0, cor_order = 1, cor_lookahead = 1;
    double cor_pthr = 0.0;
    std::uint64_t cor_seed = 0;
    cor->add_option("-e,--events", cor_events)->required()->check(CLI::ExistingFile);
    cor->add_option("-m,--model", cor_model, "model JSON to write")->required();
    cor->add_flag("--update", cor_update, "continue from the existing model file");
    cor->add_option("--engine", cor_engine)->check(CLI::IsMember({"stepwise", "pm"}));
    cor->add_option("--max-combo-k", cor_k, "bound states to this many events (0 = unbounded)");
    cor->add_option("--bound", cor_bound)->check(CLI::IsMember({"random", "lowest-index"}));
    cor->add_option("--order", cor_order, "partial-matching order m");
    cor->add_option("--lookahead", cor_lookahead, "partial-matching lookahead l");
    cor->add_option("--pthr", cor_pthr, "partial-matching probability threshold");
    cor->add_option("--seed", cor_seed, "root seed");
    cor->callback([&] {
        sc_correlate_options o{cor_events.c_str(), cor_model.c_str(),   cor_update ? 1 : 0,
                               engine_of(cor_engine), cor_k,            bound_policy(cor_bound),
                               cor_seed,             cor_order,         cor_lookahead,
                               cor_pthr};
        rc = report(sc_cmd_correlate(&o), "correlate");
    });

    // predict ----------------------------------------------------------------
    auto* pre = app.add_subcommand("predict", "query a model");
    std::string pre_model, pre_query = "recommend", pre_mode = "marginal", pre_state, pre_target;
    std::uint64_t pre_steps = 1;
    pre->add_option("-m,--model", pre_model)->required()->check(CLI::ExistingFile);
    pre->add_option("--query", pre_query)->check(CLI::IsMember({"next", "event-set", "nstep", "recommend"}));
    pre->add_option("--mode", pre_mode)->check(CLI::IsMember({"marginal", "from-current"}));
    pre->add_option("--state", pre_state, "event set such as {1,3}; source state for nstep");
    pre->add_option("--target", pre_target, "target state for nstep");
    pre->add_option("--steps", pre_steps, "n for nstep");
    pre->callback([&] {
        sc_predict_options o{pre_model.c_str(), pre_query.c_str(), forecast_mode(pre_mode),
                             pre_state.c_str(), pre_target.c_str(), pre_steps};
        char* csv = nullptr;
        rc = report(sc_cmd_predict(&o, &csv), "predict");
        emit(csv);
    });

    // evaluate ---------------------------------------------------------------
    auto* eva = app.add_subcommand("evaluate", "score an engine over a (k, h[, m]) grid");
    eva->set_help_flag("--help", "Print this help message and exit");  // frees -h for the horizon list
    std::string eva_events, eva_report, eva_trace, eva_engine = "stepwise", eva_bound = "random",
                                                   eva_forecast = "from-current";
    std::vector<std::size_t> eva_k{3}, eva_m{1};
    std::vector<std::uint64_t> eva_h{1};
    std::size_t eva_lookahead = 1;
    double eva_pthr = 0.0;
    std::uint64_t eva_seed = 0;
    eva->add_option("-e,--events", eva_events)->required()->check(CLI::ExistingFile);
    eva->add_option("-r,--report", eva_report, "report CSV to write")->required();
    eva->add_option("--trace", eva_trace, "per-step trace CSV");
    eva->add_option("--engine", eva_engine)->check(CLI::IsMember({"stepwise", "pm"}));
    eva->add_option("--k", eva_k, "max_combo_k values")->delimiter(',');
    eva->add_option("--h", eva_h, "horizon values")->delimiter(',');
    eva->add_option("--m", eva_m, "partial-matching orders")->delimiter(',');
    eva->add_option("--bound", eva_bound)->check(CLI::IsMember({"random", "lowest-index"}));
    eva->add_option("--forecast", eva_forecast)->check(CLI::IsMember({"marginal", "from-current"}));
    eva->add_option("--lookahead", eva_lookahead);
    eva->add_option("--pthr", eva_pthr);
    eva->add_option("--seed", eva_seed, "root seed");
    eva->callback([&] {
        sc_evaluate_options o{eva_events.c_str(),   eva_report.c_str(),       opt_c_str(eva_trace),
                              engine_of(eva_engine), eva_k.data(),             eva_k.size(),
                              eva_h.data(),          eva_h.size(),             eva_m.data(),
                              eva_m.size(),          bound_policy(eva_bound),  forecast_mode(eva_forecast),
                              eva_lookahead,         eva_pthr,                 eva_seed};
        rc = report(sc_cmd_evaluate(&o), "evaluate");
    });

    // diagnose ---------------------------------------------------------------
    auto* dia = app.add_subcommand("diagnose", "Hurst exponent, ACF and PACF per stream");
    std::string dia_in, dia_out;
    std::size_t dia_lag = 20;
    dia->add_option("-i,--input", dia_in, "stream CSV")->required()->check(CLI::ExistingFile);
    dia->add_option("-o,--out", dia_out, "diagnostics CSV")->required();
    dia->add_option("--max-lag", dia_lag);
    dia->callback([&] { rc = report(sc_cmd_diagnose(dia_in.c_str(), dia_out.c_str(), dia_lag), "diagnose"); });

    // pipeline ---------------------------------------------------------------
    auto* pip = app.add_subcommand("pipeline", "run the configured stages end to end");
    std::string pip_config, pip_stages, pip_out;
    pip->add_option("-c,--config", pip_config, "pipeline config (JSON)")->required()->check(CLI::ExistingFile);
    pip->add_option("--stages", pip_stages, "comma-separated stage subset");
    pip->add_option("--out-dir", pip_out, "overrides output_dir");
    pip->callback([&] {
        char* manifest = nullptr;
        rc = report(sc_cmd_pipeline(pip_config.c_str(), opt_c_str(pip_stages), opt_c_str(pip_out), &manifest),
                    "pipeline");
        emit(manifest);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    return rc.value_or(0);
}
