#include "fracscat/io.hpp"

#include "fracscat/errors.hpp"

#include <nlohmann/json.hpp>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace fracscat {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

namespace {

constexpr char potential_magic[8] = {'F', 'W', 'P', 'O', 'T', '1', '\n', '\0'};

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

template <class T>
void put(std::string& buf, const T& v) {
    const auto* p = reinterpret_cast<const char*>(&v);
    buf.append(p, sizeof(T));
}

class Reader {
  public:
    Reader(std::string data, std::string name) : data_(std::move(data)), name_(std::move(name)) {}

    template <class T>
    T get(const char* what) {
        if (pos_ + sizeof(T) > data_.size())
            throw FormatError(name_ + ": truncated while reading " + what);
        T v;
        std::memcpy(&v, data_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return v;
    }
    std::string bytes(std::size_t n, const char* what) {
        if (pos_ + n > data_.size())
            throw FormatError(name_ + ": truncated while reading " + what);
        std::string s = data_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    std::size_t remaining() const { return data_.size() - pos_; }

  private:
    std::string data_;
    std::string name_;
    std::size_t pos_ = 0;
};

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw FormatError(path.string() + ": cannot open for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void dump(const std::filesystem::path& path, const std::string& bytes) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec)
            throw FormatError(path.parent_path().string() + ": cannot create directory (" + ec.message() + ")");
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw FormatError(path.string() + ": cannot open for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw FormatError(path.string() + ": write failed");
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream ss(line);
    while (std::getline(ss, cur, sep))
        out.push_back(cur);
    if (!line.empty() && line.back() == sep)
        out.emplace_back();
    return out;
}

double parse_double(const std::string& tok, const std::string& where) {
    if (tok.empty())
        throw FormatError(where + ": empty field");
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size())
        throw FormatError(where + ": cannot parse '" + tok + "' as a number");
    if (!std::isfinite(v))
        throw FormatError(where + ": non-finite value '" + tok + "'");
    return v;
}

std::string farfield_header(int d) {
    std::string h = "k";
    for (int a = 0; a < d; ++a)
        h += ",xhat" + std::to_string(a);
    for (int a = 0; a < d; ++a)
        h += ",theta" + std::to_string(a);
    return h + ",re,im";
}

} // namespace

std::string settings_hash(std::string_view canonical) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void write_potential(const std::filesystem::path& path, const PotentialGrid& grid, FieldRole role,
                     std::string_view hash) {
    const auto ud = static_cast<std::size_t>(grid.d);
    if (grid.origin.size() != ud || grid.shape.size() != ud || grid.samples.size() != grid.size())
        throw FormatError("write_potential: grid shape, origin and samples are inconsistent");
    std::string buf(potential_magic, sizeof potential_magic);
    put(buf, potential_format_version);
    put(buf, static_cast<std::int32_t>(grid.d));
    put(buf, static_cast<std::int32_t>(role));
    put(buf, static_cast<std::uint32_t>(hash.size()));
    buf.append(hash.data(), hash.size());
    put(buf, grid.h);
    for (double o : grid.origin)
        put(buf, o);
    for (int n : grid.shape)
        put(buf, static_cast<std::int32_t>(n));
    put(buf, static_cast<std::uint64_t>(grid.samples.size()));
    for (double v : grid.samples)
        put(buf, v);
    dump(path, buf);
}

PotentialFile read_potential(const std::filesystem::path& path) {
    const std::string name = path.string();
    Reader r(slurp(path), name);
    if (r.bytes(sizeof potential_magic, "magic") != std::string(potential_magic, sizeof potential_magic))
        throw FormatError(name + ": not a potential file (bad magic)");
    const auto version = r.get<std::uint32_t>("version");
    if (version != potential_format_version)
        throw FormatError(name + ": unsupported version " + std::to_string(version) + " (expected " +
                          std::to_string(potential_format_version) + ")");
    PotentialFile f;
    const auto d = r.get<std::int32_t>("d");
    if (d < 1 || d > 3)
        throw FormatError(name + ": dimension " + std::to_string(d) + " out of range");
    const auto role = r.get<std::int32_t>("role");
    if (role < 0 || role > static_cast<std::int32_t>(FieldRole::potential))
        throw FormatError(name + ": unknown field role " + std::to_string(role));
    f.role = static_cast<FieldRole>(role);
    const auto hlen = r.get<std::uint32_t>("hash length");
    if (hlen > 256)
        throw FormatError(name + ": implausible hash length");
    f.settings_hash = r.bytes(hlen, "settings hash");
    auto& g = f.grid;
    g.d = d;
    g.h = r.get<double>("h");
    if (!(g.h > 0.0) || !std::isfinite(g.h))
        throw FormatError(name + ": spacing must be positive and finite");
    for (int a = 0; a < d; ++a)
        g.origin.push_back(r.get<double>("origin"));
    std::uint64_t expected = 1;
    for (int a = 0; a < d; ++a) {
        const auto n = r.get<std::int32_t>("shape");
        if (n < 1)
            throw FormatError(name + ": non-positive extent in shape");
        g.shape.push_back(n);
        expected *= static_cast<std::uint64_t>(n);
    }
    const auto count = r.get<std::uint64_t>("sample count");
    if (count != expected)
        throw FormatError(name + ": header shape implies " + std::to_string(expected) + " samples, record count is " +
                          std::to_string(count));
    if (r.remaining() < count * sizeof(double))
        throw FormatError(name + ": truncated payload (" + std::to_string(r.remaining() / sizeof(double)) + " of " +
                          std::to_string(count) + " samples)");
    g.samples.resize(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        g.samples[i] = r.get<double>("sample");
        if (std::isnan(g.samples[i]))
            throw FormatError(name + ": NaN sample at index " + std::to_string(i));
    }
    if (r.remaining() != 0)
        throw FormatError(name + ": " + std::to_string(r.remaining()) + " trailing bytes after the payload");
    return f;
}

void write_text(const std::filesystem::path& path, const std::string& text) { dump(path, text); }

std::string hash_comment(std::string_view hash) {
    return hash.empty() ? std::string{} : "# settings_hash=" + std::string(hash) + "\n";
}

void write_potential_csv(const std::filesystem::path& path, const PotentialGrid& grid, std::string_view hash) {
    std::string out = hash_comment(hash);
    for (int a = 0; a < grid.d; ++a)
        out += "x" + std::to_string(a) + ",";
    out += "value\n";
    std::vector<double> x(static_cast<std::size_t>(grid.d));
    for (std::size_t i = 0; i < grid.size(); ++i) {
        grid.point(i, x.data());
        for (double v : x)
            out += fmt17(v) + ",";
        out += fmt17(grid.samples[i]) + "\n";
    }
    dump(path, out);
}

void write_field_csv(const std::filesystem::path& path, const ComplexField& field, std::string_view hash) {
    std::string out = hash_comment(hash);
    for (int a = 0; a < field.d; ++a)
        out += "x" + std::to_string(a) + ",";
    out += "re,im,abs\n";
    for (std::size_t i = 0; i < field.size(); ++i) {
        for (double v : field.point(i))
            out += fmt17(v) + ",";
        const cplx z = field.values[i];
        out += fmt17(z.real()) + "," + fmt17(z.imag()) + "," + fmt17(std::abs(z)) + "\n";
    }
    dump(path, out);
}

void write_farfield(const std::filesystem::path& path, const FarFieldSet& ff) {
    ff.validate();
    const int d = ff.meta.d;
    std::string out = farfield_header(d) + "\n";
    for (const auto& r : ff.records) {
        out += fmt17(r.k);
        for (double v : r.xhat)
            out += "," + fmt17(v);
        for (double v : r.theta)
            out += "," + fmt17(v);
        out += "," + fmt17(r.amp.real()) + "," + fmt17(r.amp.imag()) + "\n";
    }
    dump(path, out);
    nlohmann::ordered_json meta;
    meta["format"] = "fracscat-farfield";
    meta["version"] = farfield_format_version;
    meta["d"] = d;
    meta["s"] = ff.meta.s;
    meta["potential_id"] = ff.meta.potential_id;
    meta["settings_hash"] = ff.meta.settings_hash;
    meta["records"] = ff.records.size();
    dump(path.string() + ".json", meta.dump(2) + "\n");
}

FarFieldSet read_farfield(const std::filesystem::path& path) {
    const std::string name = path.string();
    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(slurp(name + ".json"));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(name + ".json: " + e.what());
    }
    FarFieldSet ff;
    try {
        if (meta.at("format").get<std::string>() != "fracscat-farfield")
            throw FormatError(name + ".json: not a far-field sidecar");
        const auto version = meta.at("version").get<std::uint32_t>();
        if (version != farfield_format_version)
            throw FormatError(name + ".json: unsupported version " + std::to_string(version));
        ff.meta.d = meta.at("d").get<int>();
        ff.meta.s = meta.at("s").get<double>();
        ff.meta.potential_id = meta.at("potential_id").get<std::string>();
        ff.meta.settings_hash = meta.at("settings_hash").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(name + ".json: " + e.what());
    }
    const auto expected = meta.value("records", std::size_t{0});
    const int d = ff.meta.d;
    if (d < 2 || d > 3)
        throw FormatError(name + ".json: dimension " + std::to_string(d) + " out of range");

    std::istringstream in(slurp(path));
    std::string line;
    if (!std::getline(in, line))
        throw FormatError(name + ": empty file");
    const auto header = split(line, ',');
    const std::size_t ncol = static_cast<std::size_t>(2 * d + 3);
    if (header.size() != ncol)
        throw FormatError(name + ": header has " + std::to_string(header.size()) + " columns but d = " +
                          std::to_string(d) + " needs " + std::to_string(ncol));
    if (line != farfield_header(d))
        throw FormatError(name + ": unexpected header '" + line + "'");
    const auto ud = static_cast<std::size_t>(d);
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        const std::string where = name + ": record " + std::to_string(ff.records.size());
        const auto tok = split(line, ',');
        if (tok.size() != ncol)
            throw FormatError(where + " has " + std::to_string(tok.size()) + " fields, expected " +
                              std::to_string(ncol) + " for d = " + std::to_string(d));
        FarFieldRecord r;
        r.k = parse_double(tok[0], where);
        for (std::size_t a = 0; a < ud; ++a)
            r.xhat.push_back(parse_double(tok[1 + a], where));
        for (std::size_t a = 0; a < ud; ++a)
            r.theta.push_back(parse_double(tok[1 + ud + a], where));
        r.amp = {parse_double(tok[1 + 2 * ud], where), parse_double(tok[2 + 2 * ud], where)};
        ff.records.push_back(std::move(r));
    }
    if (ff.records.size() != expected)
        throw FormatError(name + ": sidecar announces " + std::to_string(expected) + " records, file holds " +
                          std::to_string(ff.records.size()) + " (truncated?)");
    ff.validate();
    return ff;
}

std::string detect_dataset(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        return "unknown";
    char head[8] = {};
    in.read(head, sizeof head);
    if (in.gcount() == 8 && std::memcmp(head, potential_magic, 8) == 0)
        return "potential";
    if (std::filesystem::exists(path.string() + ".json"))
        return "farfield";
    return "unknown";
}

} // namespace fracscat
