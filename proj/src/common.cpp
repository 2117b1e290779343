#include "llmsast/csv.hpp"
#include "llmsast/cwe_id.hpp"
#include "llmsast/digest.hpp"
#include "llmsast/error.hpp"
#include "llmsast/io.hpp"
#include "llmsast/log.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <iostream>
#include <memory>
#include <mutex>

namespace llmsast {

std::optional<CweId> CweId::parse(std::string_view text) {
    if (text.size() > 4 && (text.substr(0, 4) == "CWE-")) text.remove_prefix(4);
    if (text.empty() || text.size() > 9 || text.front() == '0') return std::nullopt;
    std::uint32_t n = 0;
    for (char c : text) {
        if (c < '0' || c > '9') return std::nullopt;
        n = n * 10 + static_cast<std::uint32_t>(c - '0');
    }
    return CweId{n};
}

std::string sha256_hex(std::string_view bytes) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
        EVP_DigestFinal_ex(ctx.get(), md.data(), &len) != 1) {
        throw Error("sha256: OpenSSL digest failure");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[md[i] >> 4]);
        out.push_back(hex[md[i] & 0xF]);
    }
    return out;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + path.string());
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot write " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw ConfigError("short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

namespace log {
namespace {

std::mutex sink_mutex;

Sink& current_sink() {
    static Sink sink = [](Level level, std::string_view message) {
        if (level < Level::warn) return;
        std::cerr << (level == Level::warn ? "warning: " : "error: ") << message << '\n';
    };
    return sink;
}

} // namespace

Sink set_sink(Sink sink) {
    std::lock_guard lock(sink_mutex);
    Sink previous = std::move(current_sink());
    current_sink() = std::move(sink);
    return previous;
}

void write(Level level, std::string_view message) {
    std::lock_guard lock(sink_mutex);
    if (current_sink()) current_sink()(level, message);
}

} // namespace log

namespace csv {

std::vector<Row> parse(std::string_view text) {
    std::vector<Row> rows;
    Row row;
    std::string field;
    std::size_t line = 1;
    std::size_t record_line = 1;
    bool in_quotes = false;
    bool after_quote = false;   // just closed a quoted field
    bool row_has_content = false;

    auto end_field = [&] {
        row.fields.push_back(std::move(field));
        field.clear();
        after_quote = false;
    };
    auto end_row = [&] {
        if (row_has_content) {
            end_field();
            row.record = rows.size() + 1;
            row.line = record_line;
            rows.push_back(std::move(row));
        }
        row = Row{};
        field.clear();
        after_quote = false;
        row_has_content = false;
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                    after_quote = true;
                }
            } else {
                if (c == '\n') ++line;
                field.push_back(c);
            }
            continue;
        }
        if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') continue;
        if (c == '\n') {
            end_row();
            ++line;
            record_line = line;
            continue;
        }
        if (!row_has_content) record_line = line;
        row_has_content = true;
        if (c == ',') {
            end_field();
        } else if (c == '"' && field.empty() && !after_quote) {
            in_quotes = true;
        } else if (after_quote) {
            throw ParseError("csv: unexpected character after closing quote on line " + std::to_string(line),
                             rows.size() + 1);
        } else {
            field.push_back(c);
        }
    }
    if (in_quotes) {
        throw ParseError("csv: unterminated quoted field starting on line " + std::to_string(record_line),
                         rows.size() + 1);
    }
    end_row();
    return rows;
}

std::string escape(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string join_quoted(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out.push_back(',');
        out.push_back('"');
        for (char c : fields[i]) {
            if (c == '"') out.push_back('"');
            out.push_back(c);
        }
        out.push_back('"');
    }
    return out;
}

std::string join(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out.push_back(',');
        out += escape(fields[i]);
    }
    return out;
}

} // namespace csv
} // namespace llmsast
