// Reference external meta-predictor: reads one request document from
// stdin and predicts the training-gap mean for every test row. Through
// the subprocess protocol this reproduces the mean baseline exactly,
// which makes it useful both as a wire-format example and as a probe
// that the external-predictor path is lossless.

#include <iostream>
#include <sstream>
#include <vector>

#include "tabgap/descriptive.hpp"
#include "tabgap/json_util.hpp"

int main() {
    std::ostringstream buf;
    buf << std::cin.rdbuf();
    try {
        const auto request = tabgap::parse_external_request(buf.str());
        if (request.train_y.empty()) {
            std::cerr << "empty training set\n";
            return 1;
        }
        const double mean = tabgap::vec_mean(request.train_y);
        const std::vector<double> preds(request.test_rows.size(), mean);
        std::cout << tabgap::external_response_json(preds);
        return 0;
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }
}
