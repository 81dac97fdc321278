#include "tabimpute/engine.hpp"

#include <json.hpp>

namespace tabimpute {

namespace {

nlohmann::json params_json(const BoostParams& p) {
    return {
        {"n_trees", p.n_trees},
        {"learning_rate", p.learning_rate},
        {"max_depth", p.max_depth},
        {"min_samples_leaf", p.min_samples_leaf},
        {"row_subsample", p.row_subsample},
        {"column_subsample", p.column_subsample},
        {"l2_leaf", p.l2_leaf},
    };
}

} // namespace

std::string to_json(const RunReport& report) {
    nlohmann::json columns = nlohmann::json::object();
    for (const auto& c : report.columns) {
        nlohmann::json entry = {
            {"kind", std::string(to_string(c.kind))},
            {"task", to_string(c.task)},
            {"n_missing", c.n_missing},
            {"searched", c.searched},
            {"models_trained", c.models_trained},
            {"time_ms", c.time_ms},
        };
        entry["params"] = c.params ? params_json(*c.params) : nlohmann::json(nullptr);
        columns[c.name] = std::move(entry);
    }

    nlohmann::json doc = {
        {"columns", std::move(columns)},
        {"iteration_deltas", report.iteration_deltas},
        {"warnings", report.warnings},
        {"search_gate", report.search_gate},
        {"models_trained", report.models_trained},
        {"searches_run", report.searches_run},
        {"factorization", report.factorization ? nlohmann::json(std::string(to_string(*report.factorization)))
                                               : nlohmann::json(nullptr)},
        {"factorization_rank", report.factorization_rank},
        {"timings_ms",
         {{"preprocess", report.preprocess_ms},
          {"factorize", report.factorize_ms},
          {"passes", report.pass_ms},
          {"total", report.total_ms}}},
    };
    return doc.dump(2) + "\n";
}

} // namespace tabimpute
