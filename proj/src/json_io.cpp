#include "pluralis/json_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "pluralis/error.hpp"

namespace pluralis {
namespace {

void emit(const Json& node, std::string& out, int indent, int depth) {
    const auto newline = [&](int level) {
        if (indent < 0) return;
        out += '\n';
        out.append(static_cast<std::size_t>(indent * level), ' ');
    };
    switch (node.type()) {
        case Json::value_t::object: {
            if (node.empty()) {
                out += "{}";
                return;
            }
            out += '{';
            bool first = true;
            for (const auto& [key, value] : node.items()) {
                if (!first) out += ',';
                first = false;
                newline(depth + 1);
                out += Json(key).dump();
                out += indent < 0 ? ":" : ": ";
                emit(value, out, indent, depth + 1);
            }
            newline(depth);
            out += '}';
            return;
        }
        case Json::value_t::array: {
            if (node.empty()) {
                out += "[]";
                return;
            }
            out += '[';
            bool first = true;
            for (const auto& value : node) {
                if (!first) out += ',';
                first = false;
                newline(depth + 1);
                emit(value, out, indent, depth + 1);
            }
            newline(depth);
            out += ']';
            return;
        }
        case Json::value_t::number_float:
            out += format_exact(node.get<double>());
            return;
        default:
            out += node.dump();
            return;
    }
}

}  // namespace

std::string format_exact(double x) {
    if (!std::isfinite(x)) return "null";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    std::string s(buf);
    // keep the token a JSON float so it reads back as number_float
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
}

std::string dump_exact(const Json& doc) {
    std::string out;
    emit(doc, out, -1, 0);
    return out;
}

std::string dump_exact_pretty(const Json& doc) {
    std::string out;
    emit(doc, out, 2, 0);
    return out;
}

Json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open file '" + path.string() + "'");
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ConfigError("", "'" + path.string() + "' is not valid JSON: " + e.what());
    }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("", "cannot write file '" + path.string() + "'");
    out << text;
    if (!out) throw ConfigError("", "write failed for '" + path.string() + "'");
}

}  // namespace pluralis
