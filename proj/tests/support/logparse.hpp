#pragma once

#include <map>
#include <string>
#include <vector>

namespace logparse {

struct Record {
    double t = 0;
    std::string kind;
    std::string subject;
    std::map<std::string, std::string> detail;
};

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = s.find(sep, start);
        if (pos == std::string::npos) {
            out.push_back(s.substr(start));
            break;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

inline Record parse_line(const std::string& line) {
    Record r;
    auto fields = split(line, ',');
    r.t = std::stod(fields.at(0));
    r.kind = fields.at(1);
    r.subject = fields.at(2);
    if (fields.size() > 3 && !fields[3].empty()) {
        for (const auto& kv : split(fields[3], ';')) {
            const std::size_t eq = kv.find('=');
            if (eq != std::string::npos)
                r.detail[kv.substr(0, eq)] = kv.substr(eq + 1);
        }
    }
    return r;
}

inline std::vector<Record> parse_log(const std::vector<std::string>& lines) {
    std::vector<Record> out;
    out.reserve(lines.size());
    for (const auto& line : lines) out.push_back(parse_line(line));
    return out;
}

} // namespace logparse
