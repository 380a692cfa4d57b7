#pragma once

#include <stdexcept>
#include <string>

namespace helvort {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

#define HELVORT_ERROR_TYPE(Name)                     \
    struct Name : Error {                            \
        explicit Name(const std::string& msg)        \
            : Error(std::string(#Name ": ") + msg) {}\
    }

HELVORT_ERROR_TYPE(InvalidSpec);
HELVORT_ERROR_TYPE(EmptyInput);
HELVORT_ERROR_TYPE(NonpositivePitch);
HELVORT_ERROR_TYPE(NonpositiveWeight);
HELVORT_ERROR_TYPE(SolverBreakdown);
HELVORT_ERROR_TYPE(NonpositiveTrace);
HELVORT_ERROR_TYPE(NonpositiveResult);
HELVORT_ERROR_TYPE(MeshMismatch);
HELVORT_ERROR_TYPE(NotProjectable);
HELVORT_ERROR_TYPE(CenterOutsideDomain);
HELVORT_ERROR_TYPE(CollapseToZero);
HELVORT_ERROR_TYPE(MaxIterations);
HELVORT_ERROR_TYPE(EmptyCore);
HELVORT_ERROR_TYPE(InsufficientData);
HELVORT_ERROR_TYPE(ConfigParse);
HELVORT_ERROR_TYPE(SolveFailure);
HELVORT_ERROR_TYPE(IoError);

#undef HELVORT_ERROR_TYPE

}  // namespace helvort
