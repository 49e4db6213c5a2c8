// Copyright 2026 The dispflow Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dispflow/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "dispflow/error.hpp"

namespace dispflow {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_double(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw FormatError("malformed number '" + std::string(s) + "'");
    return v;
}

std::size_t parse_size(const std::string& s) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw FormatError("malformed integer '" + s + "'");
    return v;
}

// Parses "key=value key=value ..." tokens.
FieldMetadata parse_pairs(const std::string& text) {
    FieldMetadata out;
    std::istringstream ss(text);
    std::string tok;
    while (ss >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos || eq == 0) throw FormatError("malformed header entry '" + tok + "'");
        out[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
    return out;
}

std::string take(FieldMetadata& m, const std::string& key) {
    const auto it = m.find(key);
    if (it == m.end()) throw FormatError("header is missing '" + key + "'");
    std::string v = it->second;
    m.erase(it);
    return v;
}

std::string extension(const std::filesystem::path& p) {
    std::string e = p.extension().string();
    std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return e;
}

constexpr const char* kFieldTag = "# dispflow-field";

// Next header token of a PNM file, skipping comments; comments are collected.
std::string pnm_token(std::istream& is, std::vector<std::string>& comments) {
    std::string tok;
    for (;;) {
        const int c = is.get();
        if (c == EOF) throw FormatError("truncated PGM header");
        if (c == '#') {
            std::string line;
            std::getline(is, line);
            comments.push_back(line);
            if (!tok.empty()) return tok;
            continue;
        }
        if (std::isspace(c)) {
            if (!tok.empty()) return tok;
            continue;
        }
        tok.push_back(static_cast<char>(c));
    }
}

}  // namespace

void write_field_csv(std::ostream& os, const ScalarField& f, const FieldMetadata& meta) {
    os << kFieldTag << " n1=" << f.n1() << " n2=" << f.n2() << " dx1=" << fmt(f.dx1()) << " dx2=" << fmt(f.dx2());
    for (const auto& [k, v] : meta) {
        if (k.empty() || k.find_first_of("= \t\n") != std::string::npos || v.find_first_of(" \t\n") != std::string::npos)
            throw InvalidArgument("metadata keys and values must not contain whitespace");
        os << ' ' << k << '=' << v;
    }
    os << '\n';
    for (std::size_t r = 0; r < f.n2(); ++r) {
        for (std::size_t j = 0; j < f.n1(); ++j) {
            if (j) os << ',';
            os << fmt(f(j, r));
        }
        os << '\n';
    }
    if (!os) throw Error("failed to write field CSV");
}

LoadedField read_field_csv(std::istream& is) {
    std::string header;
    if (!std::getline(is, header) || header.rfind(kFieldTag, 0) != 0) throw FormatError("missing field CSV header");
    FieldMetadata meta = parse_pairs(header.substr(std::string(kFieldTag).size()));
    const std::size_t n1 = parse_size(take(meta, "n1"));
    const std::size_t n2 = parse_size(take(meta, "n2"));
    const double dx1 = parse_double(take(meta, "dx1"));
    const double dx2 = parse_double(take(meta, "dx2"));
    if (n1 == 0 || n2 == 0) throw FormatError("field CSV has an empty shape");

    std::vector<double> values;
    values.reserve(n1 * n2);
    std::string line;
    std::size_t rows = 0;
    while (std::getline(is, line)) {
        if (line.empty() || line == "\r") continue;
        if (++rows > n2) throw FormatError("field CSV has more rows than its header declares");
        std::size_t start = 0, cols = 0;
        for (;;) {
            const auto comma = line.find(',', start);
            values.push_back(parse_double(std::string_view(line).substr(start, comma - start)));
            ++cols;
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (cols != n1) throw FormatError("field CSV row " + std::to_string(rows) + " has the wrong length");
    }
    if (rows != n2) throw FormatError("field CSV has fewer rows than its header declares");
    return {ScalarField(n1, n2, dx1, dx2, std::move(values)), std::move(meta)};
}

void write_field_pgm(std::ostream& os, const ScalarField& f) {
    const double lo = f.min(), hi = f.max();
    const double range = hi - lo;
    os << "P5\n# dispflow min=" << fmt(lo) << " max=" << fmt(hi) << " dx1=" << fmt(f.dx1()) << " dx2=" << fmt(f.dx2())
       << "\n"
       << f.n1() << ' ' << f.n2() << "\n65535\n";
    std::vector<unsigned char> buf(2 * f.size());
    std::size_t o = 0;
    for (std::size_t r = 0; r < f.n2(); ++r) {
        for (std::size_t j = 0; j < f.n1(); ++j) {
            const double t = range > 0.0 ? (f(j, r) - lo) / range : 0.0;
            const auto q = static_cast<std::uint16_t>(std::lround(std::clamp(t, 0.0, 1.0) * 65535.0));
            buf[o++] = static_cast<unsigned char>(q >> 8);
            buf[o++] = static_cast<unsigned char>(q & 0xFF);
        }
    }
    os.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!os) throw Error("failed to write PGM");
}

ScalarField read_field_pgm(std::istream& is) {
    char magic[2] = {0, 0};
    is.read(magic, 2);
    if (!is || magic[0] != 'P') throw FormatError("not a PGM file");
    if (magic[1] == '2') throw FormatError("unsupported format: ASCII graymap (P2); only binary P5 is read");
    if (magic[1] != '5') throw FormatError("unsupported PNM variant P" + std::string(1, magic[1]));

    std::vector<std::string> comments;
    const std::size_t n1 = parse_size(pnm_token(is, comments));
    const std::size_t n2 = parse_size(pnm_token(is, comments));
    const std::size_t maxval = parse_size(pnm_token(is, comments));
    if (n1 == 0 || n2 == 0) throw FormatError("PGM has an empty shape");
    if (maxval == 0 || maxval > 65535) throw FormatError("PGM maxval out of range");

    double lo = 0.0, hi = static_cast<double>(maxval), dx1 = 1.0 / static_cast<double>(n1),
           dx2 = 1.0 / static_cast<double>(n2);
    for (const std::string& c : comments) {
        std::istringstream ss(c);
        std::string tag;
        ss >> tag;
        if (tag != "dispflow") continue;
        std::string rest;
        std::getline(ss, rest);
        FieldMetadata m = parse_pairs(rest);
        lo = parse_double(take(m, "min"));
        hi = parse_double(take(m, "max"));
        if (m.count("dx1")) dx1 = parse_double(m["dx1"]);
        if (m.count("dx2")) dx2 = parse_double(m["dx2"]);
    }

    const std::size_t bytes = maxval > 255 ? 2 : 1;
    std::vector<unsigned char> buf(bytes * n1 * n2);
    is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (static_cast<std::size_t>(is.gcount()) != buf.size()) throw FormatError("PGM pixel data is truncated");

    std::vector<double> values(n1 * n2);
    const double scale = (hi - lo) / static_cast<double>(maxval);
    for (std::size_t i = 0; i < values.size(); ++i) {
        const unsigned q = bytes == 2 ? (unsigned{buf[2 * i]} << 8) | buf[2 * i + 1] : buf[i];
        values[i] = lo + scale * static_cast<double>(q);
    }
    return ScalarField(n1, n2, dx1, dx2, std::move(values));
}

std::ofstream open_output(const std::filesystem::path& path, bool binary) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream os(path, binary ? std::ios::binary : std::ios::openmode{});
    if (!os) throw Error("cannot open '" + path.string() + "' for writing");
    return os;
}

std::ifstream open_input(const std::filesystem::path& path, bool binary) {
    std::ifstream is(path, binary ? std::ios::binary : std::ios::openmode{});
    if (!is) throw Error("cannot open '" + path.string() + "' for reading");
    return is;
}

void write_image(const std::filesystem::path& path, const ScalarField& f, const FieldMetadata& meta) {
    const std::string ext = extension(path);
    if (ext == ".pgm") {
        auto os = open_output(path, true);
        write_field_pgm(os, f);
    } else if (ext == ".csv") {
        auto os = open_output(path);
        write_field_csv(os, f, meta);
    } else {
        throw FormatError("unknown image extension '" + ext + "' (expected .pgm or .csv)");
    }
}

LoadedField read_image_with_metadata(const std::filesystem::path& path) {
    const std::string ext = extension(path);
    if (ext == ".pgm") {
        auto is = open_input(path, true);
        return {read_field_pgm(is), {}};
    }
    if (ext == ".csv") {
        auto is = open_input(path);
        return read_field_csv(is);
    }
    throw FormatError("unknown image extension '" + ext + "' (expected .pgm or .csv)");
}

ScalarField read_image(const std::filesystem::path& path) { return read_image_with_metadata(path).field; }

void write_angles_csv(std::ostream& os, const std::vector<double>& angles) {
    os << "index,angle\n";
    for (std::size_t j = 0; j < angles.size(); ++j) os << j << ',' << fmt(angles[j]) << '\n';
}

std::vector<double> read_angles_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("index,angle", 0) != 0) throw FormatError("missing angles CSV header");
    std::vector<double> out;
    while (std::getline(is, line)) {
        if (line.empty() || line == "\r") continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw FormatError("malformed angles CSV line");
        if (parse_size(line.substr(0, comma)) != out.size()) throw FormatError("angles CSV indices out of order");
        out.push_back(parse_double(std::string_view(line).substr(comma + 1)));
    }
    return out;
}

void write_sinogram(const std::filesystem::path& data_path, const std::filesystem::path& angles_path,
                    const Sinogram& s) {
    write_image(data_path, s.data, {{"fov", fmt(s.fov)}, {"offset_spacing", fmt(s.offset_spacing)}});
    auto os = open_output(angles_path);
    write_angles_csv(os, s.angles);
}

Sinogram read_sinogram(const std::filesystem::path& data_path, const std::filesystem::path& angles_path) {
    LoadedField lf = read_image_with_metadata(data_path);
    Sinogram s;
    s.data = std::move(lf.field);
    s.offset_spacing = lf.metadata.count("offset_spacing") ? parse_double(lf.metadata["offset_spacing"]) : s.data.dx2();
    s.fov = lf.metadata.count("fov") ? parse_double(lf.metadata["fov"])
                                     : s.offset_spacing * static_cast<double>(s.data.n2() - 1) / std::sqrt(2.0);
    auto is = open_input(angles_path);
    s.angles = read_angles_csv(is);
    s.validate();
    return s;
}

void write_shifts_csv(std::ostream& os, const IntShiftField& shifts) {
    os << "index,shift\n";
    for (std::size_t j = 0; j < shifts.shifts.size(); ++j) os << j << ',' << shifts.shifts[j] << '\n';
}

void write_trace_csv(std::ostream& os, const IterTrace& trace) {
    os << "m,Fc,R,du_l2,grad_linf\n";
    os << 0 << ",," << fmt(trace.r0) << ",," << fmt(trace.grad_linf0) << '\n';
    for (const IterRecord& r : trace.records)
        os << r.m << ',' << fmt(r.fc) << ',' << fmt(r.r) << ',' << fmt(r.du_l2) << ',' << fmt(r.grad_linf) << '\n';
}

void write_series_csv(std::ostream& os, const std::string& name, const std::vector<double>& values) {
    os << "step," << name << '\n';
    for (std::size_t j = 0; j < values.size(); ++j) os << j << ',' << fmt(values[j]) << '\n';
}

}  // namespace dispflow
