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
#pragma once

#include <stepcorr/correlation_graph.hpp>
#include <stepcorr/diagnostics.hpp>
#include <stepcorr/error.hpp>
#include <stepcorr/evaluation.hpp>
#include <stepcorr/event_stream.hpp>
#include <stepcorr/generator.hpp>
#include <stepcorr/ingest.hpp>
#include <stepcorr/partial_matching.hpp>
#include <stepcorr/shewhart.hpp>

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace stepcorr {

inline constexpr std::string_view kVersion = "0.3.1";

/// Stable per-stage seed derived from the root seed and the stage name.
std::uint64_t derive_seed(std::uint64_t root_seed, std::string_view stage);

/// 64-bit FNV-1a, hex encoded.
std::string fnv1a_hex(std::string_view bytes);

/// Writes `contents` next to `path` and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);
std::string read_file(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Stages. Each works on in-memory values; the *_file wrappers add I/O.

EventStream detect_events(const ContextStream& input, const StreamSchema& schema, const ShewhartOptions& options);

struct CorrelateOptions {
    Engine engine = Engine::Stepwise;
    /// 0 leaves states unbounded.
    std::size_t max_combo_k = 0;
    BoundPolicy bound = BoundPolicy::Random;
    std::uint64_t seed = 0;
    PMConfig pm;
};

/// Feeds the stream into a new model, or into `existing` when given, and
/// returns the model document. The bounding step index continues from the
/// model's step count.
nlohmann::json correlate_events(const EventStream& events, const CorrelateOptions& options,
                                const std::optional<nlohmann::json>& existing = std::nullopt);

enum class PredictQuery { Next, EventSet, NStep, Recommend };
PredictQuery parse_predict_query(std::string_view text);

struct PredictOptions {
    PredictQuery query = PredictQuery::Recommend;
    ForecastMode mode = ForecastMode::Marginal;
    EventSet state;  // event-set query, or the source of an n-step query
    EventSet target;
    std::uint64_t steps = 1;
};

/// Answers a query against a model document and renders the answer as CSV.
std::string predict_text(const nlohmann::json& model, const PredictOptions& options);

std::string diagnostics_csv(const StreamSchema& schema, std::span<const ContextVector> vectors, std::size_t max_lag);

// ---------------------------------------------------------------------------
// Pipeline.

struct InputOptions {
    std::filesystem::path path;
    IngestOptions ingest;
    std::optional<StreamSchema> schema;
};

struct PipelineConfig {
    std::uint64_t seed = 0;
    std::filesystem::path output_dir = ".";
    std::vector<std::string> stages;
    std::optional<GeneratorSpec> generate;
    std::optional<InputOptions> input;
    ShewhartOptions detector;
    CorrelateOptions correlate;
    ExperimentConfig evaluate;
    bool write_trace = false;
    std::size_t max_lag = 20;
    /// Canonical JSON the configuration was read from; hashed into the manifest.
    nlohmann::json source;

    static PipelineConfig from_json(const nlohmann::json& doc);
    void validate() const;
};

struct PipelineResult {
    std::vector<std::string> stages_run;
    std::map<std::string, std::filesystem::path> artifacts;
    nlohmann::json manifest;
};

/// Thrown when a stage fails; carries the stage name.
class StageError : public Error {
  public:
    StageError(std::string stage, const Error& cause)
        : Error(cause.code(), "stage '" + stage + "' failed: " + cause.what()), stage_(std::move(stage)) {}
    const std::string& stage() const noexcept { return stage_; }

  private:
    std::string stage_;
};

/// Runs the selected stages in pipeline order, reading missing intermediate
/// artifacts from the output directory. A manifest is written on success and
/// on stage failure (flagged partial).
PipelineResult run_pipeline(const PipelineConfig& config);

inline const std::vector<std::string>& pipeline_stage_order() {
    static const std::vector<std::string> order{"generate", "ingest", "detect", "correlate", "evaluate", "diagnose"};
    return order;
}

}  // namespace stepcorr
