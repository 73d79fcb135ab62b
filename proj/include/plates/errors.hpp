#pragma once

#include <stdexcept>
#include <string>

namespace plates {

enum class ErrorKind {
    Config,
    DegenerateInput,
    DomainError,
    SingularTransform,
    NonConvergence,
    IllConditioned,
    NotPositiveDefinite,
    NotOrthotropic,
    BudgetExceeded,
    TemplateCheckFailed,
    OutOfRange,
    ResolutionCapExceeded,
};

const char *to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string &what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), m_kind(kind) {}
    ErrorKind kind() const { return m_kind; }

private:
    ErrorKind m_kind;
};

// Process exit code used by the command line front end.
int exit_code(ErrorKind kind);

} // namespace plates
