#include "meshmend/mesh_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "meshmend/error.hpp"

namespace meshmend {
namespace {

// Splits a line into whitespace-separated tokens, dropping a trailing '#' comment.
std::vector<std::string_view> tokenize(std::string_view line) {
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    std::vector<std::string_view> tokens;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        const std::size_t start = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        if (i > start) tokens.push_back(line.substr(start, i - start));
    }
    return tokens;
}

double parse_double(std::string_view token, std::size_t line) {
    double value = 0.0;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    if (first != last && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last)
        throw ParseError("expected a number, got '" + std::string(token) + "'", line);
    if (!std::isfinite(value))
        throw NonFiniteError("line " + std::to_string(line) + ": non-finite coordinate '" +
                             std::string(token) + "'");
    return value;
}

long long parse_integer(std::string_view token, std::size_t line) {
    long long value = 0;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    if (first != last && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last)
        throw ParseError("expected an integer, got '" + std::string(token) + "'", line);
    return value;
}

void append_fan(Mesh& mesh, const std::vector<Index>& polygon) {
    for (std::size_t k = 1; k + 1 < polygon.size(); ++k)
        mesh.faces.push_back({polygon[0], polygon[k], polygon[k + 1]});
}

// Reads lines while tracking 1-based line numbers; skips blank and comment-only lines.
class LineReader {
public:
    explicit LineReader(std::istream& in) : in_(in) {}

    bool next(std::vector<std::string_view>& tokens) {
        while (std::getline(in_, buffer_)) {
            ++line_;
            if (!buffer_.empty() && buffer_.back() == '\r') buffer_.pop_back();
            tokens = tokenize(buffer_);
            if (!tokens.empty()) return true;
        }
        return false;
    }

    std::size_t line() const { return line_; }

private:
    std::istream& in_;
    std::string buffer_;
    std::size_t line_ = 0;
};

void write_double(std::ostream& out, double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    out.write(buf, ptr - buf);
}

void write_position(std::ostream& out, const Vec3& v) {
    write_double(out, v.x);
    out.put(' ');
    write_double(out, v.y);
    out.put(' ');
    write_double(out, v.z);
}

}  // namespace

std::optional<MeshFormat> format_from_extension(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (ext == ".off") return MeshFormat::Off;
    if (ext == ".obj") return MeshFormat::Obj;
    return std::nullopt;
}

Mesh read_off(std::istream& in) {
    LineReader reader(in);
    std::vector<std::string_view> tokens;
    if (!reader.next(tokens)) throw ParseError("empty file, expected OFF header", 0);

    // Header keyword; some datasets glue the counts to it ("OFF490 518 0").
    std::string_view head = tokens.front();
    if (head.substr(0, 3) != "OFF") throw ParseError("missing OFF header", reader.line());
    std::vector<std::string_view> counts(tokens.begin() + 1, tokens.end());
    if (head.size() > 3) counts.insert(counts.begin(), head.substr(3));
    if (counts.empty()) {
        if (!reader.next(tokens)) throw ParseError("missing element counts", reader.line());
        counts = tokens;
    }
    if (counts.size() < 2) throw ParseError("expected vertex and face counts", reader.line());
    const long long nv = parse_integer(counts[0], reader.line());
    const long long nf = parse_integer(counts[1], reader.line());
    if (nv < 0 || nf < 0) throw ParseError("negative element count", reader.line());

    Mesh mesh;
    mesh.vertices.reserve(static_cast<std::size_t>(nv));
    mesh.faces.reserve(static_cast<std::size_t>(nf));
    for (long long i = 0; i < nv; ++i) {
        if (!reader.next(tokens)) throw ParseError("unexpected end of file in vertex list", reader.line());
        if (tokens.size() < 3) throw ParseError("vertex needs three coordinates", reader.line());
        mesh.vertices.push_back({parse_double(tokens[0], reader.line()),
                                 parse_double(tokens[1], reader.line()),
                                 parse_double(tokens[2], reader.line())});
    }

    std::vector<Index> polygon;
    for (long long i = 0; i < nf; ++i) {
        if (!reader.next(tokens)) throw ParseError("unexpected end of file in face list", reader.line());
        const long long k = parse_integer(tokens[0], reader.line());
        if (k < 3) throw ParseError("face needs at least three vertices", reader.line());
        if (static_cast<long long>(tokens.size()) < k + 1)
            throw ParseError("face lists fewer indices than declared", reader.line());
        polygon.clear();
        for (long long j = 1; j <= k; ++j) {
            const long long idx = parse_integer(tokens[static_cast<std::size_t>(j)], reader.line());
            if (idx < 0 || idx >= nv)
                throw IndexRangeError("line " + std::to_string(reader.line()) + ": vertex index " +
                                      std::to_string(idx) + " out of range [0, " +
                                      std::to_string(nv) + ")");
            polygon.push_back(static_cast<Index>(idx));
        }
        append_fan(mesh, polygon);
    }
    return mesh;
}

Mesh read_obj(std::istream& in) {
    LineReader reader(in);
    std::vector<std::string_view> tokens;
    Mesh mesh;
    std::vector<Index> polygon;
    while (reader.next(tokens)) {
        const std::string_view kind = tokens.front();
        if (kind == "v") {
            if (tokens.size() < 4) throw ParseError("vertex needs three coordinates", reader.line());
            mesh.vertices.push_back({parse_double(tokens[1], reader.line()),
                                     parse_double(tokens[2], reader.line()),
                                     parse_double(tokens[3], reader.line())});
        } else if (kind == "f") {
            if (tokens.size() < 4) throw ParseError("face needs at least three vertices", reader.line());
            polygon.clear();
            const auto count = static_cast<long long>(mesh.vertices.size());
            for (std::size_t j = 1; j < tokens.size(); ++j) {
                std::string_view ref = tokens[j];
                ref = ref.substr(0, ref.find('/'));
                const long long raw = parse_integer(ref, reader.line());
                if (raw == 0) throw ParseError("OBJ indices are 1-based; got 0", reader.line());
                const long long idx = raw > 0 ? raw - 1 : count + raw;
                if (idx < 0 || idx >= count)
                    throw IndexRangeError("line " + std::to_string(reader.line()) +
                                          ": vertex index " + std::string(tokens[j]) +
                                          " out of range");
                polygon.push_back(static_cast<Index>(idx));
            }
            append_fan(mesh, polygon);
        }
        // vn, vt, g, o, s, usemtl, mtllib, l, p ... are ignored.
    }
    return mesh;
}

void write_off(std::ostream& out, const Mesh& mesh) {
    out << "OFF\n" << mesh.vertices.size() << ' ' << mesh.faces.size() << " 0\n";
    for (const Vec3& v : mesh.vertices) {
        write_position(out, v);
        out.put('\n');
    }
    for (const Face& f : mesh.faces) out << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
}

void write_obj(std::ostream& out, const Mesh& mesh) {
    for (const Vec3& v : mesh.vertices) {
        out << "v ";
        write_position(out, v);
        out.put('\n');
    }
    for (const Face& f : mesh.faces)
        out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
}

Mesh load_mesh(const std::filesystem::path& path, std::optional<MeshFormat> format) {
    if (!format) format = format_from_extension(path);
    if (!format) throw IoError("cannot infer mesh format from '" + path.string() + "'");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    return *format == MeshFormat::Off ? read_off(in) : read_obj(in);
}

void save_mesh(const Mesh& mesh, const std::filesystem::path& path, std::optional<MeshFormat> format) {
    validate_indices(mesh);
    if (!format) format = format_from_extension(path);
    if (!format) throw IoError("cannot infer mesh format from '" + path.string() + "'");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    if (*format == MeshFormat::Off)
        write_off(out, mesh);
    else
        write_obj(out, mesh);
    out.flush();
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace meshmend
