#include "qcd/likelihood.hpp"

#include <stdexcept>
#include <utility>

namespace qcd {

ModelTriple ModelTriple::matched(std::shared_ptr<const ObservationModel> f0,
                                 std::shared_ptr<const ObservationModel> f1) {
    ModelTriple triple{std::move(f0), f1, f1};
    return triple;
}

LogRatioTriple log_ratio_step(const ModelTriple& models, const Observation& x, History history) {
    const double l0 = models.f0->log_density(x, history);
    const double l1 = models.f1_true->log_density(x, history);
    // Matched triples reuse l1 so that log_lambda_tilde is bitwise log_lambda.
    const double la =
        models.is_matched() ? l1 : models.f1_assumed->log_density(x, history);
    return {l1 - l0, la - l0, l1 - la};
}

LogRatioTriple cumulative_log_ratio(const ModelTriple& models, std::span<const Observation> xs,
                                    std::size_t k) {
    if (k < 1 || k > xs.size()) {
        throw std::out_of_range("cumulative_log_ratio: start index must satisfy 1 <= k <= n");
    }
    LogRatioTriple total;
    for (std::size_t i = k - 1; i < xs.size(); ++i) {
        total += log_ratio_step(models, xs[i], xs.first(i));
    }
    return total;
}

}  // namespace qcd
