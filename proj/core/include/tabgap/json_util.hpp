#pragma once

#include <span>
#include <string>
#include <vector>

namespace tabgap {

/// External meta-predictor wire protocol, request side: one JSON object
/// {"columns": [...], "train_X": [[...]], "train_y": [...],
///  "test_X": [[...]], "missing": null} where missing cells are null.
std::string external_request_json(std::span<const std::string> columns,
                                  std::span<const std::vector<double>> train_rows,
                                  std::span<const double> train_y,
                                  std::span<const std::vector<double>> test_rows);

/// Response side: parses {"pred": [...]} and returns the predictions.
/// Throws PredictorError on malformed output.
std::vector<double> external_response_preds(const std::string& response_text);

struct ExternalRequest {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> train_rows;  // missing cells as NaN
    std::vector<double> train_y;
    std::vector<std::vector<double>> test_rows;
};

/// Parses a request document (used by bundled predictor tools).
ExternalRequest parse_external_request(const std::string& request_text);

/// Serializes a response document.
std::string external_response_json(std::span<const double> preds);

}  // namespace tabgap
