#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "enrichkit/dataset.hpp"
#include "enrichkit/enrichment.hpp"

namespace enrichkit {

enum class ResampleMethod { rus, ros, smote, bsmote };

const char* to_string(ResampleMethod m);
ResampleMethod parse_resample_method(const std::string& s);

class ResampleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ResampleConfig {
    ResampleMethod method = ResampleMethod::smote;
    // neighbors for SMOTE interpolation, and the neighborhood size m used to
    // find borderline-SMOTE's DANGER set
    std::size_t smote_k = 5;
    std::uint64_t seed = 0;
    // Per-class target counts. Missing classes default to the dominant count
    // for over-samplers and the smallest class count for RUS. Over-samplers
    // never shrink a class and RUS never grows one.
    std::map<Label, std::size_t> target;
};

struct ResampleResult {
    Dataset data;
    std::vector<std::string> warnings;
};

/// Random under-sampling without replacement. Keeps original row order.
ResampleResult rus(const Dataset& d, const ResampleConfig& cfg);
/// Random over-sampling: exact copies of randomly drawn class members.
ResampleResult ros(const Dataset& d, const ResampleConfig& cfg);
/// SMOTE: x + u (x_nn - x) with x_nn among x's smote_k same-class neighbors.
ResampleResult smote(const Dataset& d, const ResampleConfig& cfg);
/// Borderline-SMOTE: like SMOTE, but seeds come from the DANGER set only.
/// Falls back to plain SMOTE (with a warning) when a class has no DANGER points.
ResampleResult bsmote(const Dataset& d, const ResampleConfig& cfg);

ResampleResult resample(const Dataset& d, const ResampleConfig& cfg);

/// Members of `label` whose m nearest neighbors (any class) hold at least
/// m/2 and fewer than m observations of other classes.
std::vector<std::size_t> danger_set(const Dataset& d, const Label& label, std::size_t m);

/// The resampler as a pipeline stage; the external set is ignored.
BalancingOp resample_stage(ResampleConfig cfg);

}  // namespace enrichkit
