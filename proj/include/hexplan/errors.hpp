#pragma once

#include <stdexcept>
#include <string>

namespace hexplan {

// Every failure surfaced by the library derives from Error so callers can
// catch one type; the concrete class names the condition.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

#define HEXPLAN_DEFINE_ERROR(Name)                                             \
    class Name : public Error                                                  \
    {                                                                          \
    public:                                                                    \
        explicit Name(const std::string& what) : Error(#Name ": " + what) {}   \
    }

HEXPLAN_DEFINE_ERROR(NotAdjacent);
HEXPLAN_DEFINE_ERROR(NotAPath);
HEXPLAN_DEFINE_ERROR(NotInCatalog);
HEXPLAN_DEFINE_ERROR(InvalidCatalog);
HEXPLAN_DEFINE_ERROR(UnknownVariant);
HEXPLAN_DEFINE_ERROR(InvalidMap);
HEXPLAN_DEFINE_ERROR(ParseError);
HEXPLAN_DEFINE_ERROR(UnsupportedRatio);
HEXPLAN_DEFINE_ERROR(NoPath);
HEXPLAN_DEFINE_ERROR(SelfOverlap);
HEXPLAN_DEFINE_ERROR(Infeasible);
HEXPLAN_DEFINE_ERROR(UnknownScenario);

#undef HEXPLAN_DEFINE_ERROR

} // namespace hexplan
