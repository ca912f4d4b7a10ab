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
#include <stepcorr/stepcorr.h>

#include <stepcorr/pipeline.hpp>

#include <nlohmann/json.hpp>

#include <cstring>
#include <filesystem>
#include <sstream>
#include <string>

struct sc_detector_bank {
    stepcorr::DetectorBank bank;
    double tightness;
};

struct sc_graph {
    stepcorr::CorrelationGraph graph;
};

struct sc_pm {
    stepcorr::PartialMatchTrie trie;
};

namespace {

using stepcorr::ErrorCode;

thread_local std::string g_last_error;

sc_status to_status(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return SC_ERR_INVALID_ARGUMENT;
        case ErrorCode::Parse: return SC_ERR_PARSE;
        case ErrorCode::Io: return SC_ERR_IO;
        case ErrorCode::UndefinedModel: return SC_ERR_UNDEFINED_MODEL;
        case ErrorCode::UndefinedConditional: return SC_ERR_UNDEFINED_CONDITIONAL;
        case ErrorCode::Numeric: return SC_ERR_NUMERIC;
        case ErrorCode::Overflow: return SC_ERR_OVERFLOW;
    }
    return SC_ERR_INTERNAL;
}

sc_status set_error(sc_status status, std::string message) {
    g_last_error = std::move(message);
    return status;
}

// Every entry point funnels through here so no exception crosses the boundary.
template <typename Fn>
sc_status guarded(Fn&& fn) noexcept {
    try {
        fn();
        return SC_OK;
    } catch (const stepcorr::Error& e) {
        return set_error(to_status(e.code()), e.what());
    } catch (const nlohmann::json::exception& e) {
        return set_error(SC_ERR_PARSE, e.what());
    } catch (const std::filesystem::filesystem_error& e) {
        return set_error(SC_ERR_IO, e.what());
    } catch (const std::bad_alloc&) {
        return set_error(SC_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return set_error(SC_ERR_INTERNAL, e.what());
    } catch (...) {
        return set_error(SC_ERR_INTERNAL, "unknown failure");
    }
}

void need(const void* p, const char* what) {
    if (!p) stepcorr::fail(ErrorCode::InvalidArgument, std::string(what) + " must not be null");
}

stepcorr::EventSet to_set(const uint16_t* members, size_t len) {
    if (len > 0) need(members, "members");
    return stepcorr::EventSet::from_members({members, members + len});
}

void write_set(const stepcorr::EventSet& s, uint16_t* out, size_t capacity, size_t* out_len) {
    need(out_len, "out_len");
    *out_len = s.size();
    if (s.size() > capacity) stepcorr::fail(ErrorCode::InvalidArgument, "output buffer too small");
    if (s.size() > 0) need(out, "out_members");
    std::copy(s.members().begin(), s.members().end(), out);
}

char* dup_string(const std::string& text) {
    auto* out = static_cast<char*>(std::malloc(text.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, text.c_str(), text.size() + 1);
    return out;
}

stepcorr::CompareMode compare_mode(sc_compare_mode m) {
    return m == SC_COMPARE_UPDATE_FIRST ? stepcorr::CompareMode::UpdateFirst : stepcorr::CompareMode::BeforeUpdate;
}
stepcorr::ForecastMode forecast_mode(sc_forecast_mode m) {
    return m == SC_FORECAST_FROM_CURRENT ? stepcorr::ForecastMode::FromCurrent : stepcorr::ForecastMode::Marginal;
}
stepcorr::BoundPolicy bound_policy(sc_bound_policy p) {
    return p == SC_BOUND_LOWEST_INDEX ? stepcorr::BoundPolicy::LowestIndex : stepcorr::BoundPolicy::Random;
}
stepcorr::Engine engine_of(sc_engine e) {
    return e == SC_ENGINE_PM ? stepcorr::Engine::PartialMatching : stepcorr::Engine::Stepwise;
}

std::vector<std::string> split_names(const char* text) {
    std::vector<std::string> out;
    std::string cur;
    for (const char* p = text; *p; ++p) {
        if (*p == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(*p);
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

extern "C" {

const char* sc_version(void) { return stepcorr::kVersion.data(); }

const char* sc_last_error(void) { return g_last_error.c_str(); }

const char* sc_status_name(sc_status status) {
    switch (status) {
        case SC_OK: return "ok";
        case SC_ERR_INVALID_ARGUMENT: return "invalid argument";
        case SC_ERR_PARSE: return "parse error";
        case SC_ERR_IO: return "i/o error";
        case SC_ERR_UNDEFINED_MODEL: return "undefined model";
        case SC_ERR_UNDEFINED_CONDITIONAL: return "undefined conditional";
        case SC_ERR_NUMERIC: return "numeric error";
        case SC_ERR_OVERFLOW: return "overflow";
        case SC_ERR_BUFFER_TOO_SMALL: return "buffer too small";
        case SC_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

void sc_string_free(char* text) { std::free(text); }

sc_status sc_detector_bank_create(size_t n, double tightness, uint64_t warmup, sc_compare_mode mode,
                                  sc_detector_bank** out) {
    return guarded([&] {
        need(out, "out");
        *out = nullptr;
        stepcorr::require(n >= 1 && n <= stepcorr::kMaxStreams, "stream count out of range");
        stepcorr::ShewhartOptions opts{tightness, warmup, compare_mode(mode)};
        *out = new sc_detector_bank{stepcorr::DetectorBank(n, opts), tightness};
    });
}

void sc_detector_bank_destroy(sc_detector_bank* bank) { delete bank; }

sc_status sc_detector_bank_step(sc_detector_bank* bank, const double* values, size_t n, uint8_t* bits_out) {
    return guarded([&] {
        need(bank, "bank");
        need(values, "values");
        need(bits_out, "bits_out");
        const auto t = bank->bank.size() ? bank->bank.detector(0).stats().count() + 1 : 1;
        const auto ev = bank->bank.detect(t, std::span<const double>(values, n));
        std::copy(ev.bits.begin(), ev.bits.end(), bits_out);
    });
}

sc_status sc_detector_bank_stats(const sc_detector_bank* bank, size_t stream, uint64_t* count, double* mean,
                                 double* stddev, double* ucl, double* lcl) {
    return guarded([&] {
        need(bank, "bank");
        stepcorr::require(stream < bank->bank.size(), "stream index out of range");
        const auto& d = bank->bank.detector(stream);
        if (count) *count = d.stats().count();
        if (mean) *mean = d.stats().mean();
        if (stddev) *stddev = d.stats().stddev();
        if (ucl) *ucl = d.ucl();
        if (lcl) *lcl = d.lcl();
    });
}

sc_status sc_count_bounded_states(size_t n, size_t max_combo_k, uint64_t* out) {
    return guarded([&] {
        need(out, "out");
        *out = stepcorr::count_bounded_states(n, max_combo_k);
    });
}

sc_status sc_bound_state(const uint16_t* members, size_t len, size_t max_combo_k, sc_bound_policy policy,
                         uint64_t seed, uint64_t step, uint16_t* out_members, size_t* out_len) {
    return guarded([&] {
        const auto bounded =
            stepcorr::bound_state(to_set(members, len), {max_combo_k, bound_policy(policy), seed}, step);
        write_set(bounded, out_members, max_combo_k, out_len);
    });
}

sc_status sc_graph_create(size_t n, sc_graph** out) {
    return guarded([&] {
        need(out, "out");
        *out = nullptr;
        stepcorr::require(n <= stepcorr::kMaxStreams, "stream count out of range");
        *out = new sc_graph{stepcorr::CorrelationGraph(n)};
    });
}

void sc_graph_destroy(sc_graph* graph) { delete graph; }

sc_status sc_graph_observe(sc_graph* graph, const uint16_t* members, size_t len) {
    return guarded([&] {
        need(graph, "graph");
        graph->graph.observe(to_set(members, len));
    });
}

sc_status sc_graph_steps(const sc_graph* graph, uint64_t* out) {
    return guarded([&] {
        need(graph, "graph");
        need(out, "out");
        *out = graph->graph.steps();
    });
}

sc_status sc_graph_prior(const sc_graph* graph, const uint16_t* members, size_t len, double* out) {
    return guarded([&] {
        need(graph, "graph");
        need(out, "out");
        *out = graph->graph.prior(to_set(members, len));
    });
}

sc_status sc_graph_conditional(const sc_graph* graph, const uint16_t* from, size_t from_len, const uint16_t* to,
                               size_t to_len, double* out) {
    return guarded([&] {
        need(graph, "graph");
        need(out, "out");
        const auto p = graph->graph.conditional(to_set(from, from_len), to_set(to, to_len));
        if (!p) stepcorr::fail(ErrorCode::UndefinedConditional, "source state has no observed successor");
        *out = *p;
    });
}

sc_status sc_graph_predict_event_set(const sc_graph* graph, const uint16_t* members, size_t len,
                                     sc_forecast_mode mode, double* out) {
    return guarded([&] {
        need(graph, "graph");
        need(out, "out");
        *out = graph->graph.predict_event_set(to_set(members, len), forecast_mode(mode));
    });
}

sc_status sc_graph_nstep(const sc_graph* graph, const uint16_t* from, size_t from_len, const uint16_t* to,
                         size_t to_len, uint64_t steps, double* out) {
    return guarded([&] {
        need(graph, "graph");
        need(out, "out");
        const auto p = graph->graph.nstep_transition(to_set(from, from_len), to_set(to, to_len), steps);
        if (!p) stepcorr::fail(ErrorCode::UndefinedConditional, "source state has no observed successor");
        *out = *p;
    });
}

sc_status sc_graph_recommend(const sc_graph* graph, sc_forecast_mode mode, uint16_t* out_members, size_t capacity,
                             size_t* out_len, int* out_defined) {
    return guarded([&] {
        need(graph, "graph");
        need(out_defined, "out_defined");
        const auto rec = graph->graph.recommend(forecast_mode(mode));
        *out_defined = rec ? 1 : 0;
        if (rec) {
            write_set(*rec, out_members, capacity, out_len);
        } else if (out_len) {
            *out_len = 0;
        }
    });
}

sc_status sc_graph_to_json(const sc_graph* graph, char** out_json) {
    return guarded([&] {
        need(graph, "graph");
        need(out_json, "out_json");
        *out_json = dup_string(graph->graph.to_json().dump());
    });
}

sc_status sc_graph_from_json(const char* json, sc_graph** out) {
    return guarded([&] {
        need(json, "json");
        need(out, "out");
        *out = nullptr;
        *out = new sc_graph{stepcorr::CorrelationGraph::from_json(nlohmann::json::parse(json))};
    });
}

sc_status sc_pm_create(size_t max_order, size_t lookahead, double p_thr, sc_pm** out) {
    return guarded([&] {
        need(out, "out");
        *out = nullptr;
        stepcorr::PMConfig config{max_order, lookahead, p_thr};
        config.validate();
        *out = new sc_pm{stepcorr::PartialMatchTrie(config)};
    });
}

void sc_pm_destroy(sc_pm* pm) { delete pm; }

sc_status sc_pm_observe(sc_pm* pm, const uint16_t* members, size_t len) {
    return guarded([&] {
        need(pm, "pm");
        pm->trie.observe(to_set(members, len));
    });
}

sc_status sc_pm_recommend(const sc_pm* pm, uint16_t* out_members, size_t capacity, size_t* out_len,
                          int* out_defined) {
    return guarded([&] {
        need(pm, "pm");
        need(out_defined, "out_defined");
        const auto rec = pm->trie.recommend();
        *out_defined = rec ? 1 : 0;
        if (rec) {
            write_set(*rec, out_members, capacity, out_len);
        } else if (out_len) {
            *out_len = 0;
        }
    });
}

sc_status sc_pm_to_json(const sc_pm* pm, char** out_json) {
    return guarded([&] {
        need(pm, "pm");
        need(out_json, "out_json");
        *out_json = dup_string(pm->trie.to_json().dump());
    });
}

sc_status sc_precision_recall(uint64_t tp, uint64_t fp, uint64_t fn, double* precision, int* has_precision,
                              double* recall, int* has_recall) {
    return guarded([&] {
        const auto pr = stepcorr::precision_recall({tp, fp, fn});
        if (has_precision) *has_precision = pr.precision ? 1 : 0;
        if (has_recall) *has_recall = pr.recall ? 1 : 0;
        if (precision) *precision = pr.precision.value_or(0.0);
        if (recall) *recall = pr.recall.value_or(0.0);
    });
}

sc_status sc_hurst_rs(const double* series, size_t len, double* hurst, int* clamped, size_t* window_count) {
    return guarded([&] {
        need(series, "series");
        need(hurst, "hurst");
        const auto h = stepcorr::hurst_rs({series, len});
        *hurst = h.hurst;
        if (clamped) *clamped = h.clamped ? 1 : 0;
        if (window_count) *window_count = h.window_count;
    });
}

sc_status sc_acf(const double* series, size_t len, size_t max_lag, double* out) {
    return guarded([&] {
        need(series, "series");
        need(out, "out");
        const auto r = stepcorr::acf({series, len}, max_lag);
        std::copy(r.begin(), r.end(), out);
    });
}

sc_status sc_pacf(const double* series, size_t len, size_t max_lag, double* out) {
    return guarded([&] {
        need(series, "series");
        need(out, "out");
        const auto r = stepcorr::pacf({series, len}, max_lag);
        std::copy(r.begin(), r.end(), out);
    });
}

sc_status sc_cmd_generate(const char* spec_json_path, const char* out_csv, const char* truth_csv, int has_seed,
                          uint64_t seed_override) {
    return guarded([&] {
        need(spec_json_path, "spec path");
        need(out_csv, "output path");
        auto spec = stepcorr::GeneratorSpec::from_json(nlohmann::json::parse(stepcorr::read_file(spec_json_path)));
        if (has_seed) spec.seed = stepcorr::derive_seed(seed_override, "generate");
        const auto data = stepcorr::generate_stream(spec);
        std::ostringstream csv;
        stepcorr::write_context_csv(csv, data.schema, data.vectors);
        stepcorr::write_file_atomic(out_csv, csv.str());
        if (truth_csv) {
            std::ostringstream truth;
            stepcorr::write_truth_csv(truth, data.truth);
            stepcorr::write_file_atomic(truth_csv, truth.str());
        }
    });
}

sc_status sc_cmd_detect(const sc_detect_options* options, char** out_summary) {
    return guarded([&] {
        need(options, "options");
        need(options->input_path, "input path");
        need(options->output_path, "output path");
        stepcorr::IngestOptions ingest;
        if (options->format) ingest.format = stepcorr::parse_input_format(options->format);
        if (options->align) ingest.align = stepcorr::parse_align_policy(options->align);
        if (options->on_error) ingest.on_error = stepcorr::parse_error_policy(options->on_error);
        const auto text = stepcorr::read_file(options->input_path);
        stepcorr::StreamSchema schema;
        if (options->streams) {
            schema.stream_names = split_names(options->streams);
            std::istringstream head(text);
            const auto inferred = stepcorr::infer_schema(head, ingest.format);
            schema.timestamp_column = inferred.timestamp_column;
        } else {
            std::istringstream head(text);
            schema = stepcorr::infer_schema(head, ingest.format);
        }
        std::istringstream body(text);
        auto parsed = stepcorr::parse_context_stream(body, schema, ingest);
        const stepcorr::ShewhartOptions detector{options->tightness, options->warmup, compare_mode(options->mode)};
        const auto events = stepcorr::detect_events(parsed, schema, detector);
        std::ostringstream csv;
        stepcorr::write_event_csv(csv, events);
        stepcorr::write_file_atomic(options->output_path, csv.str());
        if (out_summary) {
            std::size_t signals = 0;
            for (const auto& ev : events.vectors) {
                for (auto b : ev.bits) signals += b;
            }
            std::ostringstream s;
            s << "rows=" << parsed.vectors.size() << " skipped_rows=" << parsed.skipped_rows
              << " dropped_steps=" << parsed.dropped_steps << " signals=" << signals;
            *out_summary = dup_string(s.str());
        }
    });
}

sc_status sc_cmd_correlate(const sc_correlate_options* options) {
    return guarded([&] {
        need(options, "options");
        need(options->events_path, "events path");
        need(options->model_path, "model path");
        std::istringstream in(stepcorr::read_file(options->events_path));
        const auto events = stepcorr::read_event_csv(in);
        stepcorr::CorrelateOptions opts;
        opts.engine = engine_of(options->engine);
        opts.max_combo_k = options->max_combo_k;
        opts.bound = bound_policy(options->bound);
        opts.seed = stepcorr::derive_seed(options->seed, "correlate");
        opts.pm = {options->order, options->lookahead, options->p_thr};
        if (opts.engine == stepcorr::Engine::PartialMatching) opts.pm.validate();
        std::optional<nlohmann::json> existing;
        if (options->update && std::filesystem::exists(options->model_path)) {
            existing = nlohmann::json::parse(stepcorr::read_file(options->model_path));
        }
        const auto model = stepcorr::correlate_events(events, opts, existing);
        stepcorr::write_file_atomic(options->model_path, model.dump(2) + "\n");
    });
}

sc_status sc_cmd_predict(const sc_predict_options* options, char** out_csv) {
    return guarded([&] {
        need(options, "options");
        need(options->model_path, "model path");
        need(out_csv, "out_csv");
        const auto model = nlohmann::json::parse(stepcorr::read_file(options->model_path));
        stepcorr::PredictOptions q;
        q.query = stepcorr::parse_predict_query(options->query ? options->query : "recommend");
        q.mode = forecast_mode(options->mode);
        if (options->state) q.state = stepcorr::EventSet::parse(options->state);
        if (options->target) q.target = stepcorr::EventSet::parse(options->target);
        q.steps = options->steps;
        *out_csv = dup_string(stepcorr::predict_text(model, q));
    });
}

sc_status sc_cmd_evaluate(const sc_evaluate_options* options) {
    return guarded([&] {
        need(options, "options");
        need(options->events_path, "events path");
        need(options->report_path, "report path");
        std::istringstream in(stepcorr::read_file(options->events_path));
        const auto events = stepcorr::read_event_csv(in);
        stepcorr::ExperimentConfig config;
        config.engine = engine_of(options->engine);
        if (options->k_count) config.k_values.assign(options->k_values, options->k_values + options->k_count);
        if (options->h_count) config.h_values.assign(options->h_values, options->h_values + options->h_count);
        if (options->m_count) config.m_values.assign(options->m_values, options->m_values + options->m_count);
        config.bound = bound_policy(options->bound);
        config.forecast = forecast_mode(options->forecast);
        config.lookahead = options->lookahead;
        config.p_thr = options->p_thr;
        config.seed = stepcorr::derive_seed(options->seed, "evaluate");
        config.keep_traces = options->trace_path != nullptr;
        const auto states = events.states();
        const auto results = stepcorr::run_experiment(states, config);
        std::ostringstream report;
        stepcorr::write_report_csv(report, results);
        stepcorr::write_file_atomic(options->report_path, report.str());
        if (options->trace_path) {
            std::ostringstream trace;
            stepcorr::write_trace_csv(trace, results);
            stepcorr::write_file_atomic(options->trace_path, trace.str());
        }
    });
}

sc_status sc_cmd_diagnose(const char* input_csv, const char* output_csv, size_t max_lag) {
    return guarded([&] {
        need(input_csv, "input path");
        need(output_csv, "output path");
        const auto text = stepcorr::read_file(input_csv);
        std::istringstream head(text);
        const auto schema = stepcorr::infer_schema(head, stepcorr::InputFormat::Csv);
        std::istringstream body(text);
        const auto parsed = stepcorr::parse_context_stream(body, schema, {});
        stepcorr::write_file_atomic(output_csv, stepcorr::diagnostics_csv(schema, parsed.vectors, max_lag));
    });
}

sc_status sc_cmd_pipeline(const char* config_path, const char* stages, const char* out_dir, char** out_manifest) {
    return guarded([&] {
        need(config_path, "config path");
        auto doc = nlohmann::json::parse(stepcorr::read_file(config_path));
        if (!doc.is_object()) stepcorr::fail(ErrorCode::InvalidArgument, "pipeline config must be a JSON object");
        if (stages) doc["stages"] = split_names(stages);
        if (out_dir) doc["output_dir"] = out_dir;
        const auto config = stepcorr::PipelineConfig::from_json(doc);
        const auto result = stepcorr::run_pipeline(config);
        if (out_manifest) *out_manifest = dup_string(result.manifest.dump(2));
    });
}

}  // extern "C"
