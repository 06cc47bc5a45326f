#ifndef MSA_MODEL_IO_HPP
#define MSA_MODEL_IO_HPP

#include <string>
#include <vector>

#include "msa/combine.hpp"
#include "msa/kde.hpp"
#include "msa/maxent.hpp"
#include "msa/synthbench.hpp"
#include "msa/zsolve.hpp"

namespace msa {

// JSON wire formats. Doubles round-trip exactly through these strings.

std::string maxent_to_json(const MaxentModel& model);
MaxentModel maxent_from_json(const std::string& text);

std::string kde_to_json(const KdeModel& model, int domain,
                        const std::vector<double>& cv_grid = {},
                        const std::vector<double>& cv_scores = {});
KdeModel kde_from_json(const std::string& text, int* domain = nullptr);

// Predictor bundle:
// {"model":"regression","d":D,"predictors":[
//    {"type":"linear","weights":[...],"bias":B,"output":"raw"|"logistic_pm1"}, ...]}
// {"model":"probability","d":D,"labels":L,"predictors":[
//    {"type":"linear_softmax","weights":[[...] x L],"bias":[... L]}, ...]}
SourcePredictorSet predictors_from_json(const std::string& text, int* dim = nullptr);

std::string zsolve_result_to_json(const ZSolveResult& result, double spread);
ZSolveResult zsolve_result_from_json(const std::string& text);

ExperimentConfig experiment_config_from_json(const std::string& text);
std::string experiment_config_to_json(const ExperimentConfig& config);
std::string experiment_report_to_json(const ExperimentReport& report);
std::string experiment_curves_csv(const ExperimentReport& report);

}  // namespace msa

#endif  // MSA_MODEL_IO_HPP
