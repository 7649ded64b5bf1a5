#include "tabgap/study_config.hpp"

#include <algorithm>

#include "json.hpp"
#include "tabgap/error.hpp"

namespace tabgap {

bool FamilySpec::contains(const std::string& method_id, Subtype subtype) const {
    for (const FamilyMember& m : members) {
        if (m.method_id != method_id) continue;
        if (m.subtypes.empty()) return true;
        if (std::find(m.subtypes.begin(), m.subtypes.end(), subtype) != m.subtypes.end()) {
            return true;
        }
    }
    return false;
}

const FamilySpec& StudyDefinition::family(const std::string& family_id) const {
    for (const FamilySpec& f : families) {
        if (f.family_id == family_id) return f;
    }
    throw ConfigError("unknown family '" + family_id + "'");
}

namespace {

ApplicabilityRule parse_rule(const nlohmann::json& j) {
    ApplicabilityRule rule;
    if (j.contains("max_train_samples")) rule.max_train_samples = j.at("max_train_samples").get<long long>();
    if (j.contains("max_features")) rule.max_features = j.at("max_features").get<long long>();
    if (j.contains("max_classes")) rule.max_classes = j.at("max_classes").get<long long>();
    rule.classification_only = j.value("classification_only", false);
    for (const auto& bound : {rule.max_train_samples, rule.max_features, rule.max_classes}) {
        if (bound && *bound <= 0) throw ConfigError("applicability bounds must be positive");
    }
    return rule;
}

}  // namespace

StudyDefinition load_study_config(const std::string& json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }

    StudyDefinition def;
    std::set<std::string> family_ids;
    for (const auto& jf : doc.value("families", nlohmann::json::array())) {
        FamilySpec family;
        family.family_id = jf.at("id").get<std::string>();
        if (!family_ids.insert(family.family_id).second) {
            throw ConfigError("duplicate family id '" + family.family_id + "'");
        }
        for (const auto& jm : jf.at("members")) {
            FamilyMember member;
            if (jm.is_string()) {
                member.method_id = jm.get<std::string>();
            } else {
                member.method_id = jm.at("method").get<std::string>();
                for (const auto& js : jm.value("subtypes", nlohmann::json::array())) {
                    const auto st = subtype_from_string(js.get<std::string>());
                    if (!st) throw ConfigError("unknown subtype '" + js.get<std::string>() + "'");
                    member.subtypes.push_back(*st);
                }
            }
            family.members.push_back(std::move(member));
        }
        if (family.members.empty()) {
            throw ConfigError("family '" + family.family_id + "' has no members");
        }
        def.families.push_back(std::move(family));
    }

    std::optional<ApplicabilityRule> default_rule;
    if (doc.contains("applicability") && !doc.at("applicability").is_null()) {
        default_rule = parse_rule(doc.at("applicability"));
    }

    std::set<std::string> comparison_ids;
    for (const auto& jc : doc.value("comparisons", nlohmann::json::array())) {
        ComparisonSpec cmp;
        cmp.comparison_id = jc.at("id").get<std::string>();
        if (!comparison_ids.insert(cmp.comparison_id).second) {
            throw ConfigError("duplicate comparison id '" + cmp.comparison_id + "'");
        }
        cmp.family_a = jc.at("family_a").get<std::string>();
        cmp.family_b = jc.at("family_b").get<std::string>();
        if (cmp.family_a == cmp.family_b) {
            throw ConfigError("comparison '" + cmp.comparison_id +
                              "' compares a family with itself");
        }
        for (const std::string& fid : {cmp.family_a, cmp.family_b}) {
            if (!family_ids.count(fid)) {
                throw ConfigError("comparison '" + cmp.comparison_id +
                                  "' references undeclared family '" + fid + "'");
            }
        }
        if (jc.contains("applicability") && !jc.at("applicability").is_null()) {
            cmp.applicability = parse_rule(jc.at("applicability"));
        } else {
            cmp.applicability = default_rule;
        }
        def.comparisons.push_back(std::move(cmp));
    }

    for (const auto& jc : doc.value("controls", nlohmann::json::array())) {
        def.controls.push_back(jc.get<std::string>());
    }
    return def;
}

std::set<std::string> applicable_datasets(const ApplicabilityRule& rule,
                                          std::span<const DatasetInfo> infos) {
    std::set<std::string> out;
    for (const DatasetInfo& info : infos) {
        if (rule.classification_only && info.problem_type == ProblemType::regression) continue;
        if (rule.max_train_samples) {
            const long long train = 2 * info.n_instances / 3;  // 3-fold protocol
            if (train > *rule.max_train_samples) continue;
        }
        if (rule.max_features && info.n_features > *rule.max_features) continue;
        if (rule.max_classes && info.n_classes && *info.n_classes > *rule.max_classes) continue;
        out.insert(info.dataset_id);
    }
    return out;
}

}  // namespace tabgap
