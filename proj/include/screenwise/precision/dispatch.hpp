#pragma once

#include <optional>

#include "screenwise/core/error.hpp"
#include "screenwise/data/factors.hpp"
#include "screenwise/data/window.hpp"
#include "screenwise/precision/deep_factor.hpp"
#include "screenwise/precision/estimate.hpp"
#include "screenwise/precision/nls.hpp"
#include "screenwise/precision/nodewise.hpp"
#include "screenwise/precision/poet.hpp"

namespace screenwise {

struct PrecisionConfig {
    NodewiseOptions nodewise;
    PoetOptions poet;
    DeepFactorConfig deep;
};

inline bool needs_factors(PrecisionMethod m) {
    return m == PrecisionMethod::ResidualNodewise || m == PrecisionMethod::DeepFactor;
}

inline PrecisionEstimate estimate_precision(PrecisionMethod method, const ReturnsMatrix& r,
                                            const FactorPanel* factors = nullptr,
                                            const PrecisionConfig& cfg = {}) {
    if (needs_factors(method) && factors == nullptr)
        throw Error(ErrorCode::Config, std::string("method '") + std::string(method_name(method)) +
                                           "' needs a factor file");
    switch (method) {
    case PrecisionMethod::Nodewise: return nodewise_precision(r, cfg.nodewise);
    case PrecisionMethod::ResidualNodewise: return residual_nodewise_precision(r, *factors, cfg.nodewise);
    case PrecisionMethod::Poet: return poet_precision(r, cfg.poet);
    case PrecisionMethod::DeepFactor: return deep_factor_precision(r, *factors, cfg.deep);
    case PrecisionMethod::NonlinearShrinkage: return nls_precision(r);
    }
    throw Error(ErrorCode::Config, "unknown precision method");
}

}  // namespace screenwise
