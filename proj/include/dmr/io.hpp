#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "dmr/types.hpp"

namespace dmr {

struct IngestOptions {
    char delimiter = ',';
};

struct Violation {
    std::size_t line = 0;  // 1-based
    std::string message;
};

struct IngestReport {
    std::size_t n_users = 0;
    std::size_t n_items = 0;
    std::size_t n_interactions = 0;
    std::vector<Violation> violations;  // capped by the caller's limit

    bool ok() const { return violations.empty(); }
};

/// Parses `user,item,timestamp,click[,category]` records. A header line is
/// auto-detected. Throws DataError naming the first offending line.
InteractionLog ingest_log(const std::string& path, const IngestOptions& opts = {});
InteractionLog parse_log_text(std::string_view text, const IngestOptions& opts = {});

/// Non-throwing scan: collects up to `max_violations` problems plus counts.
/// When `out` is non-null and the file is clean, the parsed log is stored.
IngestReport validate_log(const std::string& path, const IngestOptions& opts = {},
                          std::size_t max_violations = 10, InteractionLog* out = nullptr);

/// Canonical text form: header line, then records sorted by (user, timestamp,
/// item). Ingesting the output reproduces the log exactly.
std::string serialize_log(const InteractionLog& log, char delimiter = ',');
void write_log(const InteractionLog& log, const std::string& path, char delimiter = ',');

}  // namespace dmr
