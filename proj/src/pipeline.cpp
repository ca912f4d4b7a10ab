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
#include <stepcorr/pipeline.hpp>

#include <stepcorr/error.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace stepcorr {
namespace {

namespace fs = std::filesystem;

constexpr const char* kStreamsFile = "streams.csv";
constexpr const char* kTruthFile = "truth.csv";
constexpr const char* kEventsFile = "events.csv";
constexpr const char* kModelFile = "model.json";
constexpr const char* kReportFile = "report.csv";
constexpr const char* kTraceFile = "trace.csv";
constexpr const char* kDiagnosticsFile = "diagnostics.csv";
constexpr const char* kManifestFile = "manifest.json";

template <typename T>
std::vector<T> json_list(const nlohmann::json& doc, const char* key, std::vector<T> fallback) {
    if (!doc.contains(key)) return fallback;
    if (doc[key].is_array()) return doc[key].get<std::vector<T>>();
    return {doc[key].get<T>()};
}

ContextStream load_streams(const fs::path& path, StreamSchema& schema) {
    std::istringstream header(read_file(path));
    schema = infer_schema(header, InputFormat::Csv);
    std::istringstream body(read_file(path));
    return parse_context_stream(body, schema, {InputFormat::Csv, AlignPolicy::Strict, ErrorPolicy::Abort});
}

EventStream load_events(const fs::path& path) {
    std::istringstream in(read_file(path));
    return read_event_csv(in);
}

std::string render_probability(const std::optional<double>& p) { return p ? format_double(*p) : "undefined"; }

nlohmann::json decisions_json(const PipelineConfig& config) {
    return {
        {"compare_mode", to_string(config.detector.mode)},
        {"tightness", config.detector.tightness},
        {"warmup", config.detector.warmup},
        {"alignment", config.input ? std::string(to_string(config.input->ingest.align)) : "n/a"},
        {"bound_policy", to_string(config.evaluate.bound)},
        {"subset_distribution", "uniform without replacement"},
        {"forecast_mode", to_string(config.evaluate.forecast)},
        {"fn_rule", "one miss per step when no covering pending prediction equals the actual state"},
        {"tp_rule", "exact set equality; earliest matching record credited"},
        {"truncated_windows", "discarded unscored"},
        {"pm_suffix_conflict", "longest matching suffix wins"},
        {"pm_sequence_probability", "product of stepwise conditionals"},
        {"score", "cumulative TP/FP/FN over the trace"},
    };
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t root_seed, std::string_view stage) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : stage) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::uint64_t z = root_seed ^ h;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::string fnv1a_hex(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream out;
    out << std::hex << std::setw(16) << std::setfill('0') << h;
    return out.str();
}

void write_file_atomic(const fs::path& path, std::string_view contents) {
    if (path.has_parent_path()) {
        std::error_code dir_ec;
        fs::create_directories(path.parent_path(), dir_ec);
        if (dir_ec) fail(ErrorCode::Io, "cannot create " + path.parent_path().string() + ": " + dir_ec.message());
    }
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) fail(ErrorCode::Io, "cannot open " + tmp.string() + " for writing");
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) fail(ErrorCode::Io, "failed writing " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) fail(ErrorCode::Io, "cannot move " + tmp.string() + " into place: " + ec.message());
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

EventStream detect_events(const ContextStream& input, const StreamSchema& schema, const ShewhartOptions& options) {
    schema.validate();
    DetectorBank bank(schema.n(), options);
    EventStream out;
    out.stream_names = schema.stream_names;
    out.vectors.reserve(input.vectors.size());
    for (const auto& cv : input.vectors) out.vectors.push_back(bank.detect(cv));
    if (schema.timestamp_column) out.timestamps = input.timestamps;
    return out;
}

nlohmann::json correlate_events(const EventStream& events, const CorrelateOptions& options,
                                const std::optional<nlohmann::json>& existing) {
    auto bound = [&](const EventSet& s, std::uint64_t step) {
        if (options.max_combo_k == 0) return s;
        return bound_state(s, {options.max_combo_k, options.bound, options.seed}, step);
    };
    if (options.engine == Engine::Stepwise) {
        auto graph = existing ? CorrelationGraph::from_json(*existing) : CorrelationGraph(events.n());
        require(graph.n() == 0 || graph.n() == events.n(), "model and event stream disagree on the stream count");
        for (const auto& ev : events.vectors) graph.observe(bound(encode_state(ev), graph.steps() + 1));
        return graph.to_json();
    }
    auto trie = existing ? PartialMatchTrie::from_json(*existing) : PartialMatchTrie(options.pm);
    for (const auto& ev : events.vectors) trie.observe(bound(encode_state(ev), trie.steps() + 1));
    return trie.to_json();
}

PredictQuery parse_predict_query(std::string_view text) {
    if (text == "next") return PredictQuery::Next;
    if (text == "event-set" || text == "set") return PredictQuery::EventSet;
    if (text == "nstep") return PredictQuery::NStep;
    if (text == "recommend") return PredictQuery::Recommend;
    fail(ErrorCode::InvalidArgument, "unknown predict query '" + std::string(text) + "'");
}

std::string predict_text(const nlohmann::json& model, const PredictOptions& options) {
    std::ostringstream out;
    if (model.contains("paths")) {
        const auto trie = PartialMatchTrie::from_json(model);
        if (options.query == PredictQuery::Recommend) {
            auto rec = trie.recommend();
            out << "state\n" << (rec ? rec->to_string() : "undefined") << '\n';
        } else if (options.query == PredictQuery::Next) {
            out << "sequence,probability,order\n";
            for (const auto& p : trie.predict()) {
                out << '"';
                for (std::size_t i = 0; i < p.sequence.size(); ++i) out << (i ? " " : "") << p.sequence[i].to_string();
                out << "\"," << format_double(p.probability) << ',' << p.order << '\n';
            }
        } else {
            fail(ErrorCode::InvalidArgument, "partial-matching models answer only 'next' and 'recommend'");
        }
        return out.str();
    }

    const auto graph = CorrelationGraph::from_json(model);
    switch (options.query) {
        case PredictQuery::Next: {
            const auto forecast = graph.predict_next(options.mode);
            out << "state,probability\n";
            for (const auto& [state, p] : forecast.distribution.probs) {
                out << '"' << state.to_string() << "\"," << format_double(p) << '\n';
            }
            break;
        }
        case PredictQuery::EventSet:
            out << "event_set,probability\n\"" << options.state.to_string() << "\","
                << format_double(graph.predict_event_set(options.state, options.mode)) << '\n';
            break;
        case PredictQuery::NStep:
            out << "from,to,steps,probability\n\"" << options.state.to_string() << "\",\""
                << options.target.to_string() << "\"," << options.steps << ','
                << render_probability(graph.nstep_transition(options.state, options.target, options.steps)) << '\n';
            break;
        case PredictQuery::Recommend: {
            auto rec = graph.recommend(options.mode);
            out << "state\n" << (rec ? '"' + rec->to_string() + '"' : std::string("undefined")) << '\n';
            break;
        }
    }
    return out.str();
}

std::string diagnostics_csv(const StreamSchema& schema, std::span<const ContextVector> vectors, std::size_t max_lag) {
    std::ostringstream out;
    out << "stream,hurst,hurst_raw,hurst_clamped,hurst_windows";
    for (std::size_t k = 0; k <= max_lag; ++k) out << ",acf_" << k;
    for (std::size_t k = 1; k <= max_lag; ++k) out << ",pacf_" << k;
    out << ",error\n";
    for (std::size_t s = 0; s < schema.n(); ++s) {
        std::vector<double> series;
        series.reserve(vectors.size());
        for (const auto& cv : vectors) series.push_back(cv.values.at(s));
        out << schema.stream_names[s];
        try {
            const auto d = diagnose_series(series, max_lag);
            out << ',' << format_double(d.hurst.hurst) << ',' << format_double(d.hurst.raw_slope) << ','
                << (d.hurst.clamped ? 1 : 0) << ',' << d.hurst.window_count;
            for (double v : d.acf) out << ',' << format_double(v);
            for (double v : d.pacf) out << ',' << format_double(v);
            out << ",\n";
        } catch (const Error& e) {
            out << std::string(4 + 2 * max_lag + 1, ',') << '"' << e.what() << "\"\n";
        }
    }
    return out.str();
}

PipelineConfig PipelineConfig::from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) fail(ErrorCode::InvalidArgument, "pipeline config must be a JSON object");
    PipelineConfig config;
    config.source = doc;
    try {
        config.seed = doc.value("seed", std::uint64_t{0});
        config.output_dir = doc.value("output_dir", std::string("."));
        config.stages = json_list<std::string>(doc, "stages", {});
        if (doc.contains("generate")) config.generate = GeneratorSpec::from_json(doc["generate"]);
        if (doc.contains("input")) {
            const auto& in = doc["input"];
            InputOptions input;
            input.path = in.at("path").get<std::string>();
            input.ingest.format = parse_input_format(in.value("format", std::string("csv")));
            input.ingest.align = parse_align_policy(in.value("align", std::string("strict")));
            input.ingest.on_error = parse_error_policy(in.value("on_error", std::string("abort")));
            if (in.contains("streams")) {
                StreamSchema schema;
                schema.stream_names = in["streams"].get<std::vector<std::string>>();
                if (in.contains("timestamp_column")) schema.timestamp_column = in["timestamp_column"].get<std::string>();
                input.schema = std::move(schema);
            }
            config.input = std::move(input);
        }
        if (doc.contains("detect")) {
            const auto& d = doc["detect"];
            config.detector.tightness = d.value("tightness", config.detector.tightness);
            config.detector.warmup = d.value("warmup", config.detector.warmup);
            config.detector.mode = parse_compare_mode(d.value("mode", std::string("before")));
        }
        if (doc.contains("correlate")) {
            const auto& c = doc["correlate"];
            config.correlate.engine = parse_engine(c.value("engine", std::string("stepwise")));
            config.correlate.max_combo_k = c.value("max_combo_k", std::size_t{0});
            config.correlate.bound = parse_bound_policy(c.value("bound", std::string("random")));
            config.correlate.pm.max_order = c.value("order", std::size_t{1});
            config.correlate.pm.lookahead = c.value("lookahead", std::size_t{1});
            config.correlate.pm.p_thr = c.value("pthr", 0.0);
        }
        if (doc.contains("evaluate")) {
            const auto& e = doc["evaluate"];
            auto& x = config.evaluate;
            x.engine = parse_engine(e.value("engine", std::string("stepwise")));
            x.k_values = json_list<std::size_t>(e, "k", x.k_values);
            x.h_values = json_list<std::uint64_t>(e, "h", x.h_values);
            x.m_values = json_list<std::size_t>(e, "m", x.m_values);
            x.bound = parse_bound_policy(e.value("bound", std::string("random")));
            x.forecast = parse_forecast_mode(e.value("forecast", std::string("from-current")));
            x.lookahead = e.value("lookahead", std::size_t{1});
            x.p_thr = e.value("pthr", 0.0);
            config.write_trace = e.value("trace", false);
            x.keep_traces = config.write_trace;
        }
        if (doc.contains("diagnose")) config.max_lag = doc["diagnose"].value("max_lag", config.max_lag);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::InvalidArgument, std::string("malformed pipeline config: ") + e.what());
    }
    config.validate();
    return config;
}

void PipelineConfig::validate() const {
    const auto& order = pipeline_stage_order();
    for (const auto& s : stages) {
        require(std::find(order.begin(), order.end(), s) != order.end(), "unknown stage '" + s + "'");
    }
    auto selected = [&](const char* s) { return stages.empty() || std::find(stages.begin(), stages.end(), s) != stages.end(); };
    require(!(generate && input) || !stages.empty(), "config has both 'generate' and 'input'; select stages");
    if (selected("generate") && !stages.empty()) require(generate.has_value(), "stage 'generate' needs a 'generate' section");
    if (selected("ingest") && !stages.empty()) require(input.has_value(), "stage 'ingest' needs an 'input' section");
    if (input) {
        require(fs::exists(input->path), "input file " + input->path.string() + " does not exist");
        if (input->schema) input->schema->validate();
    }
    ShewhartDetector probe(detector);
    if (correlate.engine == Engine::PartialMatching) correlate.pm.validate();
    evaluate.validate();
}

PipelineResult run_pipeline(const PipelineConfig& config) {
    config.validate();
    fs::create_directories(config.output_dir);

    std::vector<std::string> selected = config.stages;
    if (selected.empty()) {
        if (config.generate) selected.push_back("generate");
        if (config.input) selected.push_back("ingest");
        selected.insert(selected.end(), {"detect", "correlate", "evaluate", "diagnose"});
    }
    auto wants = [&](const std::string& s) { return std::find(selected.begin(), selected.end(), s) != selected.end(); };
    auto path_of = [&](const char* name) { return config.output_dir / name; };

    PipelineResult result;
    result.manifest = {
        {"tool", "stepcorr"},
        {"versions", {{"stepcorr", kVersion}, {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                                                     std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                                                     std::to_string(NLOHMANN_JSON_VERSION_PATCH)}}},
        {"config", config.source},
        {"config_hash", fnv1a_hex(config.source.dump())},
        {"root_seed", config.seed},
        {"derived_seeds",
         {{"generate", derive_seed(config.seed, "generate")},
          {"correlate", derive_seed(config.seed, "correlate")},
          {"evaluate", derive_seed(config.seed, "evaluate")}}},
        {"decisions", decisions_json(config)},
    };

    std::optional<ContextStream> streams;
    StreamSchema schema;
    std::optional<EventStream> events;
    auto need_streams = [&] {
        if (!streams) streams = load_streams(path_of(kStreamsFile), schema);
    };
    auto need_events = [&] {
        if (!events) events = load_events(path_of(kEventsFile));
    };
    auto record = [&](const std::string& name, const char* file, const std::string& contents) {
        write_file_atomic(path_of(file), contents);
        result.artifacts[name] = path_of(file);
    };

    for (const auto& stage : pipeline_stage_order()) {
        if (!wants(stage)) continue;
        try {
            if (stage == "generate") {
                auto spec = *config.generate;
                spec.seed = derive_seed(config.seed, "generate");
                auto data = generate_stream(spec);
                schema = data.schema;
                std::ostringstream csv;
                write_context_csv(csv, schema, data.vectors);
                record("streams", kStreamsFile, csv.str());
                std::ostringstream truth;
                write_truth_csv(truth, data.truth);
                record("truth", kTruthFile, truth.str());
                streams = ContextStream{std::move(data.vectors), {}, 0, 0, {}};
            } else if (stage == "ingest") {
                const auto& in = *config.input;
                if (in.schema) {
                    schema = *in.schema;
                } else {
                    std::istringstream head(read_file(in.path));
                    schema = infer_schema(head, in.ingest.format);
                }
                std::istringstream body(read_file(in.path));
                auto parsed = parse_context_stream(body, schema, in.ingest);
                if (!schema.timestamp_column) parsed.timestamps.clear();
                std::ostringstream csv;
                write_context_csv(csv, schema, parsed.vectors, parsed.timestamps);
                record("streams", kStreamsFile, csv.str());
                result.manifest["ingest"] = {{"rows", parsed.vectors.size()},
                                             {"skipped_rows", parsed.skipped_rows},
                                             {"dropped_steps", parsed.dropped_steps}};
                streams = std::move(parsed);
            } else if (stage == "detect") {
                need_streams();
                events = detect_events(*streams, schema, config.detector);
                std::ostringstream csv;
                write_event_csv(csv, *events);
                record("events", kEventsFile, csv.str());
            } else if (stage == "correlate") {
                need_events();
                auto opts = config.correlate;
                opts.seed = derive_seed(config.seed, "correlate");
                record("model", kModelFile, correlate_events(*events, opts).dump(2) + "\n");
            } else if (stage == "evaluate") {
                need_events();
                auto exp = config.evaluate;
                exp.seed = derive_seed(config.seed, "evaluate");
                const auto states = events->states();
                const auto results = run_experiment(states, exp);
                std::ostringstream report;
                write_report_csv(report, results);
                record("report", kReportFile, report.str());
                if (config.write_trace) {
                    std::ostringstream trace;
                    write_trace_csv(trace, results);
                    record("trace", kTraceFile, trace.str());
                }
            } else if (stage == "diagnose") {
                need_streams();
                record("diagnostics", kDiagnosticsFile, diagnostics_csv(schema, streams->vectors, config.max_lag));
            }
            result.stages_run.push_back(stage);
        } catch (const Error& e) {
            result.manifest["partial"] = true;
            result.manifest["failed_stage"] = stage;
            result.manifest["failure"] = e.what();
            result.manifest["stages_run"] = result.stages_run;
            nlohmann::json arts = nlohmann::json::object();
            for (const auto& [name, p] : result.artifacts) arts[name] = p.filename().string();
            result.manifest["artifacts"] = arts;
            write_file_atomic(path_of(kManifestFile), result.manifest.dump(2) + "\n");
            throw StageError(stage, e);
        }
    }

    result.manifest["partial"] = false;
    result.manifest["stages_run"] = result.stages_run;
    nlohmann::json arts = nlohmann::json::object();
    for (const auto& [name, p] : result.artifacts) arts[name] = p.filename().string();
    result.manifest["artifacts"] = arts;
    write_file_atomic(path_of(kManifestFile), result.manifest.dump(2) + "\n");
    result.artifacts["manifest"] = path_of(kManifestFile);
    return result;
}

}  // namespace stepcorr
