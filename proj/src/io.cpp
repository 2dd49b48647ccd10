#include "dmr/io.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

namespace dmr {

namespace {

std::vector<std::string_view> split_fields(std::string_view line, char delim) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(delim, start);
        if (pos == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return fields;
}

bool parse_int64(std::string_view s, std::int64_t& out) {
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last && !s.empty();
}

bool parse_click(std::string_view s, bool& out) {
    if (s == "0") {
        out = false;
        return true;
    }
    if (s == "1") {
        out = true;
        return true;
    }
    return false;
}

struct ParsedRecord {
    UserId user;
    Interaction interaction;
};

// Returns false with `error` set on a malformed record.
bool parse_record(std::string_view line, char delim, ParsedRecord& rec, std::string& error) {
    auto fields = split_fields(line, delim);
    if (fields.size() != 4 && fields.size() != 5) {
        error = "expected 4 or 5 fields, got " + std::to_string(fields.size());
        return false;
    }
    std::int64_t item = 0, ts = 0, category = -1;
    bool click = false;
    if (!parse_int64(fields[0], rec.user)) {
        error = "bad user id '" + std::string(fields[0]) + "'";
        return false;
    }
    if (!parse_int64(fields[1], item)) {
        error = "bad item id '" + std::string(fields[1]) + "'";
        return false;
    }
    if (!parse_int64(fields[2], ts)) {
        error = "bad timestamp '" + std::string(fields[2]) + "'";
        return false;
    }
    if (!parse_click(fields[3], click)) {
        error = "bad click flag '" + std::string(fields[3]) + "' (expected 0 or 1)";
        return false;
    }
    if (fields.size() == 5) {
        if (!parse_int64(fields[4], category) || category < 0) {
            error = "bad category '" + std::string(fields[4]) + "'";
            return false;
        }
    }
    if (ts < 0) {
        error = "negative timestamp " + std::to_string(ts);
        return false;
    }
    rec.interaction.item = item;
    rec.interaction.timestamp = ts;
    rec.interaction.click = click;
    rec.interaction.category = static_cast<std::int32_t>(category);
    return true;
}

bool looks_like_header(std::string_view line, char delim) {
    auto fields = split_fields(line, delim);
    if (fields.size() < 4) return false;
    std::int64_t v;
    return !parse_int64(fields[0], v);
}

struct ScanResult {
    InteractionLog log;
    IngestReport report;
};

ScanResult scan_text(std::string_view text, const IngestOptions& opts,
                     std::size_t max_violations, bool stop_at_first) {
    ScanResult result;
    std::set<std::tuple<UserId, ItemId, Timestamp>> seen;
    std::set<UserId> users;
    std::set<ItemId> items;

    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool first_data_line = true;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        std::string_view line = (eol == std::string_view::npos)
                                    ? text.substr(pos)
                                    : text.substr(pos, eol - pos);
        pos = (eol == std::string_view::npos) ? text.size() + 1 : eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        if (first_data_line && looks_like_header(line, opts.delimiter)) {
            first_data_line = false;
            continue;
        }
        first_data_line = false;

        ParsedRecord rec;
        std::string error;
        if (!parse_record(line, opts.delimiter, rec, error)) {
            if (stop_at_first) {
                throw DataError("line " + std::to_string(line_no) + ": " + error);
            }
            if (result.report.violations.size() < max_violations) {
                result.report.violations.push_back({line_no, error});
            }
            continue;
        }
        auto key = std::make_tuple(rec.user, rec.interaction.item, rec.interaction.timestamp);
        if (!seen.insert(key).second) {
            std::string msg = "duplicate (user,item,timestamp) triple (user " +
                              std::to_string(rec.user) + ", item " +
                              std::to_string(rec.interaction.item) + ", timestamp " +
                              std::to_string(rec.interaction.timestamp) + ")";
            if (stop_at_first) {
                throw DataError("line " + std::to_string(line_no) + ": " + msg);
            }
            if (result.report.violations.size() < max_violations) {
                result.report.violations.push_back({line_no, msg});
            }
            continue;
        }
        users.insert(rec.user);
        items.insert(rec.interaction.item);
        result.log.add(rec.user, rec.interaction);
    }
    result.log.finalize();
    result.report.n_users = users.size();
    result.report.n_items = items.size();
    result.report.n_interactions = result.log.interaction_count();
    return result;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

InteractionLog parse_log_text(std::string_view text, const IngestOptions& opts) {
    return scan_text(text, opts, 0, /*stop_at_first=*/true).log;
}

InteractionLog ingest_log(const std::string& path, const IngestOptions& opts) {
    return parse_log_text(read_file(path), opts);
}

IngestReport validate_log(const std::string& path, const IngestOptions& opts,
                          std::size_t max_violations, InteractionLog* out) {
    ScanResult result = scan_text(read_file(path), opts, max_violations, /*stop_at_first=*/false);
    if (out != nullptr && result.report.ok()) *out = std::move(result.log);
    return result.report;
}

std::string serialize_log(const InteractionLog& log, char delimiter) {
    std::string text = "user";
    text += delimiter;
    text += "item";
    text += delimiter;
    text += "timestamp";
    text += delimiter;
    text += "click";
    text += delimiter;
    text += "category\n";
    for (const auto& u : log.users()) {
        for (const auto& x : u.interactions) {
            text += std::to_string(u.user);
            text += delimiter;
            text += std::to_string(x.item);
            text += delimiter;
            text += std::to_string(x.timestamp);
            text += delimiter;
            text += x.click ? '1' : '0';
            if (x.has_category()) {
                text += delimiter;
                text += std::to_string(x.category);
            }
            text += '\n';
        }
    }
    return text;
}

void write_log(const InteractionLog& log, const std::string& path, char delimiter) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path);
    out << serialize_log(log, delimiter);
    if (!out) throw DataError("write failed: " + path);
}

}  // namespace dmr
