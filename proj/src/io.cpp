#include "entdist/io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace entdist {

namespace fs = std::filesystem;

void ensure_parent_dir(const std::string& path) {
    const fs::path parent = fs::path(path).parent_path();
    if (!parent.empty()) {
        std::error_code ec;
        fs::create_directories(parent, ec);
        if (ec) {
            throw std::runtime_error("cannot create directory '" + parent.string() +
                                     "': " + ec.message());
        }
    }
}

void atomic_write(const std::string& path, const std::string& content) {
    ensure_parent_dir(path);
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error("cannot open '" + tmp + "' for writing: " +
                                     std::strerror(errno));
        }
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            throw std::runtime_error("write failed for '" + tmp + "': " + std::strerror(errno));
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        throw std::runtime_error("cannot rename '" + tmp + "' to '" + path +
                                 "': " + ec.message());
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open '" + path + "': " + std::strerror(errno));
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) {
        throw std::runtime_error("read failed for '" + path + "'");
    }
    return buf.str();
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string::size_type start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

double parse_double(const std::string& token, const std::string& context) {
    std::size_t pos = 0;
    double value = 0.0;
    try {
        value = std::stod(token, &pos);
    } catch (const std::exception&) {
        throw std::runtime_error(context + ": not a number: '" + token + "'");
    }
    while (pos < token.size() && std::isspace(static_cast<unsigned char>(token[pos]))) ++pos;
    if (pos != token.size()) {
        throw std::runtime_error(context + ": trailing characters in number: '" + token + "'");
    }
    return value;
}

long long parse_int(const std::string& token, const std::string& context) {
    std::size_t pos = 0;
    long long value = 0;
    try {
        value = std::stoll(token, &pos);
    } catch (const std::exception&) {
        throw std::runtime_error(context + ": not an integer: '" + token + "'");
    }
    while (pos < token.size() && std::isspace(static_cast<unsigned char>(token[pos]))) ++pos;
    if (pos != token.size()) {
        throw std::runtime_error(context + ": trailing characters in integer: '" + token + "'");
    }
    return value;
}

}  // namespace entdist
