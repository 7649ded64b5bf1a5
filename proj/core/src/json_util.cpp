#include "tabgap/json_util.hpp"

#include <cmath>

#include "json.hpp"
#include "tabgap/descriptive.hpp"
#include "tabgap/error.hpp"

namespace tabgap {

namespace {

nlohmann::json row_to_json(const std::vector<double>& row) {
    nlohmann::json out = nlohmann::json::array();
    for (double v : row) {
        if (std::isnan(v)) {
            out.push_back(nullptr);
        } else {
            out.push_back(v);
        }
    }
    return out;
}

std::vector<double> row_from_json(const nlohmann::json& row) {
    std::vector<double> out;
    out.reserve(row.size());
    for (const auto& cell : row) {
        out.push_back(cell.is_null() ? kMissing : cell.get<double>());
    }
    return out;
}

}  // namespace

std::string external_request_json(std::span<const std::string> columns,
                                  std::span<const std::vector<double>> train_rows,
                                  std::span<const double> train_y,
                                  std::span<const std::vector<double>> test_rows) {
    nlohmann::json doc;
    doc["columns"] = std::vector<std::string>(columns.begin(), columns.end());
    nlohmann::json train = nlohmann::json::array();
    for (const auto& row : train_rows) train.push_back(row_to_json(row));
    doc["train_X"] = std::move(train);
    doc["train_y"] = std::vector<double>(train_y.begin(), train_y.end());
    nlohmann::json test = nlohmann::json::array();
    for (const auto& row : test_rows) test.push_back(row_to_json(row));
    doc["test_X"] = std::move(test);
    doc["missing"] = nullptr;
    return doc.dump() + "\n";
}

std::vector<double> external_response_preds(const std::string& response_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(response_text);
    } catch (const nlohmann::json::exception& e) {
        throw PredictorError("external predictor output is not valid JSON: " +
                             std::string(e.what()));
    }
    if (!doc.contains("pred") || !doc.at("pred").is_array()) {
        throw PredictorError("external predictor output lacks a 'pred' array");
    }
    std::vector<double> preds;
    for (const auto& v : doc.at("pred")) {
        if (!v.is_number()) throw PredictorError("'pred' contains a non-numeric entry");
        preds.push_back(v.get<double>());
    }
    return preds;
}

ExternalRequest parse_external_request(const std::string& request_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(request_text);
    } catch (const nlohmann::json::exception& e) {
        throw PredictorError("request is not valid JSON: " + std::string(e.what()));
    }
    ExternalRequest req;
    for (const auto& c : doc.at("columns")) req.columns.push_back(c.get<std::string>());
    for (const auto& row : doc.at("train_X")) req.train_rows.push_back(row_from_json(row));
    for (const auto& y : doc.at("train_y")) req.train_y.push_back(y.get<double>());
    for (const auto& row : doc.at("test_X")) req.test_rows.push_back(row_from_json(row));
    return req;
}

std::string external_response_json(std::span<const double> preds) {
    nlohmann::json doc;
    doc["pred"] = std::vector<double>(preds.begin(), preds.end());
    return doc.dump() + "\n";
}

}  // namespace tabgap
