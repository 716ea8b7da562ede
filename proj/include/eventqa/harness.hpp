#pragma once

// Dataset pipeline, oracle predictions, evaluation metrics and the
// question-type baselines.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "eventqa/io.hpp"
#include "eventqa/qparser.hpp"
#include "eventqa/questions.hpp"

namespace eventqa {

/// Runs fn(0..n-1) on `threads` workers; results come back in index order.
/// The first exception thrown by any task is rethrown after all workers stop.
template <typename F>
auto parallel_map(std::size_t n, int threads, F&& fn) -> std::vector<decltype(fn(std::size_t{}))> {
    using R = decltype(fn(std::size_t{}));
    std::vector<std::optional<R>> slots(n);
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                slots[i].emplace(fn(i));
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next = n;
            }
        }
    };
    const std::size_t count = std::max<std::size_t>(1, std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), n));
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < count; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
    std::vector<R> out;
    out.reserve(n);
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

int default_threads();

enum class Split : std::uint8_t { Train, Val, Test };
std::string_view to_string(Split s);
Split parse_split(std::string_view s);
/// Scene id hash mod 4: two buckets train, one val, one test.
Split split_of(int scene_id);

// ---------------------------------------------------------------------------
// Pipeline

std::vector<Scene> generate_scenes(int n, std::uint64_t seed, const GenConfig& gen, const SimConfig& sim,
                                   int threads);
std::vector<ExecContext> annotate_scenes(const std::vector<Scene>& scenes, const SimConfig& sim, int threads);
std::vector<QAItem> enumerate_all(const std::vector<Scene>& scenes, const std::vector<ExecContext>& contexts,
                                  const TemplateSet& templates, int threads);

/// On-disk bundle: scenes.json, annotations.json, manifest.json and questions.jsonl.
struct Bundle {
    std::vector<Scene> scenes;
    std::vector<ExecContext> contexts;
    nlohmann::json manifest;
};

void write_scene_bundle(const std::string& dir, std::uint64_t seed, const GenConfig& gen, const SimConfig& sim,
                        const std::vector<Scene>& scenes, const std::vector<ExecContext>& contexts);
/// Checks the manifest's config hash and counts against the files.
Bundle read_bundle(const std::string& dir);
/// Writes the questions file and records the question config in the manifest.
void write_questions(const std::string& dir, const std::string& questions_path, const std::vector<QAItem>& items,
                     std::uint64_t seed, const Quota& quota, int templates_version,
                     const std::vector<std::string>& warnings);
std::vector<QAItem> read_questions(const std::string& path);

// ---------------------------------------------------------------------------
// Predictions and evaluation

struct Prediction {
    int id = 0;
    std::string answer;              // descriptive
    std::vector<std::string> choices;  // "yes"/"no" per option

    bool operator==(const Prediction&) const = default;
};

nlohmann::json prediction_to_json(const Prediction& p);
Prediction prediction_from_json(const nlohmann::json& j);
std::vector<Prediction> read_predictions(const std::string& path);

/// Answers every question with the symbolic executor. With `parse_text` the
/// programs come from parsing the question/choice text instead of the stored
/// programs.
std::vector<Prediction> oracle_predictions(std::span<const QAItem> questions, const std::vector<Scene>& scenes,
                                           const std::vector<ExecContext>& contexts, const Grammar& grammar,
                                           bool parse_text, int threads);

struct StratumScore {
    int questions = 0;
    int correct_questions = 0;
    int options = 0;          // multiple-choice only
    int correct_options = 0;  // multiple-choice only
    int missing = 0;

    double question_accuracy() const { return questions ? double(correct_questions) / questions : 0.0; }
    double option_accuracy() const { return options ? double(correct_options) / options : 0.0; }
};

struct EvalReport {
    std::map<std::string, StratumScore> strata;  // see kStrata
    StratumScore descriptive;                    // all descriptive sub-types together
    int missing = 0;

    nlohmann::json to_json() const;
    /// Every accuracy figure in the report, by name (for "all metrics equal 1.0" checks).
    std::map<std::string, double> metrics() const;
};

/// Predictions must follow the question order; ids may be skipped (counted
/// wrong) but not repeated, reordered or unknown (InputError).
EvalReport evaluate(std::span<const QAItem> truth, std::span<const Prediction> predictions);

std::vector<Prediction> baseline_random(std::span<const QAItem> questions, std::uint64_t seed);

struct FrequentModel {
    std::map<std::string, std::string> answer;  // descriptive stratum -> modal answer
    std::map<std::string, std::string> option;  // multiple-choice type -> modal yes/no
    std::vector<std::string> fallbacks;         // strata without training data
};

FrequentModel fit_frequent(std::span<const QAItem> train);
/// Strata without training data fall back to random answers.
std::vector<Prediction> baseline_frequent(const FrequentModel& model, std::span<const QAItem> test, std::uint64_t seed);

/// Closed-form descriptive accuracy of uniform guessing: sum over sub-types of w_s / |A_s|.
double expected_random_descriptive(std::span<const QAItem> questions);
/// Descriptive accuracy the modal answers must reach on `test`: sum of w_s times the test share of the mode.
double expected_frequent_descriptive(const FrequentModel& model, std::span<const QAItem> test);

std::vector<QAItem> select_split(std::span<const QAItem> items, Split split);

}  // namespace eventqa
