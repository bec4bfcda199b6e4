#include "flatnas/checkpoint.hpp"

#include <bit>
#include <fstream>
#include <sstream>

#include "flatnas/errors.hpp"
#include "flatnas/util.hpp"

namespace flatnas {

namespace {

void write_doubles_le(std::ostream& os, const std::vector<double>& values) {
    for (double v : values) {
        auto bits = std::bit_cast<std::uint64_t>(v);
        char bytes[8];
        for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
        os.write(bytes, 8);
    }
}

std::vector<double> read_doubles_le(std::istream& is, std::size_t count) {
    std::vector<double> values(count);
    for (auto& v : values) {
        char bytes[8];
        is.read(bytes, 8);
        if (!is) throw IoError("truncated checkpoint payload");
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i)
            bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[i])) << (8 * i);
        v = std::bit_cast<double>(bits);
    }
    return values;
}

std::string expect_line(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw IoError("truncated checkpoint header");
    return line;
}

std::vector<std::string> expect_fields(std::istream& is, std::string_view keyword,
                                       std::size_t min_fields) {
    auto fields = split(expect_line(is), ' ');
    if (fields.empty() || fields[0] != keyword || fields.size() < min_fields)
        throw ParseError("expected checkpoint line starting with '" + std::string(keyword) + "'");
    return fields;
}

void write_section(std::ostream& os, std::string_view label, const ParamSet& params) {
    os << "section " << label << ' ' << params.entries().size() << '\n';
    for (const auto& e : params.entries()) {
        os << "entry " << e.name << ' ' << param_group_name(e.group) << ' ' << e.shape.size();
        for (auto d : e.shape) os << ' ' << d;
        os << ' ' << e.size() << '\n';
        write_doubles_le(os, e.values);
    }
}

ParamSet read_section(std::istream& is, std::string* label_out) {
    auto fields = expect_fields(is, "section", 3);
    if (label_out) *label_out = fields[1];
    const auto entry_count = static_cast<std::size_t>(parse_int(fields[2]));
    ParamSet params;
    for (std::size_t i = 0; i < entry_count; ++i) {
        auto ef = expect_fields(is, "entry", 5);
        ParamEntry e;
        e.name = ef[1];
        e.group = param_group_from_string(ef[2]);
        const auto ndims = static_cast<std::size_t>(parse_int(ef[3]));
        if (ef.size() != 5 + ndims) throw ParseError("bad entry header field count");
        for (std::size_t d = 0; d < ndims; ++d)
            e.shape.push_back(static_cast<std::size_t>(parse_int(ef[4 + d])));
        const auto count = static_cast<std::size_t>(parse_int(ef[4 + ndims]));
        e.values = read_doubles_le(is, count);
        params.add(std::move(e));
    }
    return params;
}

void write_header(std::ostream& os, const CheckpointHeader& header, int sections) {
    os << kCheckpointMagic << '\n';
    os << "preset " << header.preset << '\n';
    os << "seed " << header.seed << '\n';
    os << "epoch " << header.epoch << '\n';
    os << "digest " << header.config_digest << '\n';
    os << "sections " << sections << '\n';
}

int read_header(std::istream& is, CheckpointHeader* header) {
    if (expect_line(is) != kCheckpointMagic)
        throw ParseError("not a flatnas-ckpt-v1 checkpoint");
    CheckpointHeader h;
    h.preset = expect_fields(is, "preset", 2)[1];
    h.seed = parse_u64(expect_fields(is, "seed", 2)[1]);
    h.epoch = static_cast<int>(parse_int(expect_fields(is, "epoch", 2)[1]));
    h.config_digest = expect_fields(is, "digest", 2)[1];
    int sections = static_cast<int>(parse_int(expect_fields(is, "sections", 2)[1]));
    if (header) *header = h;
    return sections;
}

}  // namespace

void write_paramset_checkpoint(std::ostream& os, const CheckpointHeader& header,
                               const ParamSet& params) {
    write_header(os, header, 1);
    write_section(os, "params", params);
}

ParamSet read_paramset_checkpoint(std::istream& is, CheckpointHeader* header) {
    if (read_header(is, header) != 1) throw ParseError("expected a single-section checkpoint");
    return read_section(is, nullptr);
}

void write_supernet_checkpoint(const std::string& path, const CheckpointHeader& header,
                               const SuperNet& net) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    write_header(os, header, 2);
    write_section(os, "current", net.shared_params());
    write_section(os, "initial", net.initial_snapshot());
    if (!os) throw IoError("write failed for '" + path + "'");
}

SuperNet read_supernet_checkpoint(const std::string& path, CheckpointHeader* header) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open '" + path + "'");
    CheckpointHeader h;
    if (read_header(is, &h) != 2) throw ParseError("expected a two-section supernet checkpoint");
    std::string label;
    ParamSet current = read_section(is, &label);
    if (label != "current") throw ParseError("first supernet section must be 'current'");
    ParamSet initial = read_section(is, &label);
    if (label != "initial") throw ParseError("second supernet section must be 'initial'");
    if (header) *header = h;
    return SuperNet::from_parts(preset_space(h.preset), std::move(current), std::move(initial),
                                h.epoch);
}

void write_paramset_checkpoint(const std::string& path, const CheckpointHeader& header,
                               const ParamSet& params) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    write_paramset_checkpoint(os, header, params);
    if (!os) throw IoError("write failed for '" + path + "'");
}

ParamSet read_paramset_checkpoint(const std::string& path, CheckpointHeader* header) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open '" + path + "'");
    return read_paramset_checkpoint(is, header);
}

}  // namespace flatnas
