#include <plates/errors.hpp>
#include <plates/log.hpp>

#include <spdlog/sinks/stdout_sinks.h>

#include <cstdlib>

namespace plates {

spdlog::logger &log() {
    static std::shared_ptr<spdlog::logger> logger = [] {
        auto l = std::make_shared<spdlog::logger>("plates",
                std::make_shared<spdlog::sinks::stderr_sink_mt>());
        l->set_pattern("[%l] %v");
        auto level = spdlog::level::warn;
        if (const char *env = std::getenv("PLATES_LOG"))
            level = spdlog::level::from_str(env);
        l->set_level(level);
        return l;
    }();
    return *logger;
}

const char *to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Config:                return "ConfigError";
        case ErrorKind::DegenerateInput:       return "DegenerateInput";
        case ErrorKind::DomainError:           return "DomainError";
        case ErrorKind::SingularTransform:     return "SingularTransform";
        case ErrorKind::NonConvergence:        return "NonConvergence";
        case ErrorKind::IllConditioned:        return "IllConditioned";
        case ErrorKind::NotPositiveDefinite:   return "NotPositiveDefinite";
        case ErrorKind::NotOrthotropic:        return "NotOrthotropic";
        case ErrorKind::BudgetExceeded:        return "BudgetExceeded";
        case ErrorKind::TemplateCheckFailed:   return "TemplateCheckFailed";
        case ErrorKind::OutOfRange:            return "OutOfRange";
        case ErrorKind::ResolutionCapExceeded: return "ResolutionCapExceeded";
    }
    return "Error";
}

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Config:
            return 2;
        case ErrorKind::NonConvergence:
        case ErrorKind::IllConditioned:
        case ErrorKind::BudgetExceeded:
        case ErrorKind::ResolutionCapExceeded:
            return 3;
        default:
            return 4;
    }
}

} // namespace plates
