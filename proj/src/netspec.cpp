// SPDX-License-Identifier: MIT
#include "prashna/netspec.hpp"

#include <fstream>
#include <sstream>
#include <vector>

#include "prashna/errors.hpp"

namespace prashna {

namespace {

[[noreturn]] void spec_err(size_t lineno, const std::string& what) {
    fail(errc::spec_parse_error, "line " + std::to_string(lineno) + ": " + what);
}

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string tok;
    while (is >> tok)
        out.push_back(tok);
    return out;
}

int64_t parse_int(const std::string& s, size_t lineno) {
    try {
        size_t used = 0;
        int64_t v;
        if (s.size() > 2 && (s[0] == '0') && (s[1] == 'x' || s[1] == 'X'))
            v = static_cast<int64_t>(std::stoull(s.substr(2), &used, 16));
        else
            v = std::stoll(s, &used, 10);
        if (used != s.size() && !(s.size() > 2 && used == s.size() - 2))
            spec_err(lineno, "bad number '" + s + "'");
        return v;
    } catch (const std::exception&) {
        spec_err(lineno, "bad number '" + s + "'");
    }
}

// splits "key=value", failing when '=' is absent
std::pair<std::string, std::string> split_kv(const std::string& tok, size_t lineno) {
    auto eq = tok.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 >= tok.size())
        spec_err(lineno, "expected key=value, got '" + tok + "'");
    return {tok.substr(0, eq), tok.substr(eq + 1)};
}

void validate_protocol(const ProtocolSpec& p, size_t lineno) {
    int prev_end = 0;
    std::string prev_name;
    for (const auto& [off, f] : p.fields) {
        if (off < 0 || f.width <= 0 || off + f.width > p.header_len)
            spec_err(lineno, "field " + p.name + "." + f.name + " outside header");
        if (off < prev_end)
            fail(errc::overlapping_fields,
                 p.name + "." + prev_name + " overlaps " + p.name + "." + f.name);
        prev_end = off + f.width;
        prev_name = f.name;
    }
    for (const auto& [fname, values] : p.tail_fields) {
        bool found = false;
        for (const auto& [off, f] : p.fields)
            found = found || f.name == fname;
        if (!found)
            spec_err(lineno, "tail selector " + p.name + "." + fname + " is not a declared field");
        (void)values;
    }
}

} // namespace

std::string NetSpec::hdr_field_name(const std::string& proto, int64_t rel_off) const {
    auto unknown = [&] { return proto + ".unknown@" + std::to_string(rel_off); };
    auto pit = protocols.find(proto);
    if (pit == protocols.end())
        return unknown();
    const ProtocolSpec& p = pit->second;
    auto it = p.fields.upper_bound(static_cast<int>(rel_off));
    if (it == p.fields.begin())
        return unknown();
    --it;
    if (rel_off >= it->first && rel_off < it->first + it->second.width)
        return proto + "." + it->second.name;
    return unknown();
}

std::optional<std::string> NetSpec::next_proto(const std::string& proto, const std::string& field,
                                               int64_t value) const {
    auto pit = protocols.find(proto);
    if (pit == protocols.end())
        return std::nullopt;
    auto fit = pit->second.tail_fields.find(field);
    if (fit == pit->second.tail_fields.end())
        return std::nullopt;
    auto vit = fit->second.find(value);
    if (vit == fit->second.end())
        return std::nullopt;
    return vit->second;
}

bool NetSpec::is_tail_field(const std::string& proto, const std::string& field) const {
    auto pit = protocols.find(proto);
    return pit != protocols.end() && pit->second.tail_fields.count(field) != 0;
}

int NetSpec::header_len(const std::string& proto) const {
    auto pit = protocols.find(proto);
    if (pit == protocols.end())
        fail(errc::spec_parse_error, "unknown protocol '" + proto + "'");
    return pit->second.header_len;
}

std::string NetSpec::buff_field_name(const std::string& buffer, int64_t off) const {
    auto bit = buffers.find(buffer);
    if (bit == buffers.end())
        return buffer + ".unknown@" + std::to_string(off);
    auto fit = bit->second.fields.find(static_cast<int>(off));
    if (fit == bit->second.fields.end())
        return buffer + ".unknown@" + std::to_string(off);
    return buffer + "." + fit->second;
}

BufferRole NetSpec::buffer_role(const std::string& buffer, int64_t off) const {
    auto bit = buffers.find(buffer);
    if (bit == buffers.end())
        return BufferRole::other;
    auto fit = bit->second.fields.find(static_cast<int>(off));
    if (fit == bit->second.fields.end())
        return BufferRole::other;
    if (fit->second == bit->second.data_field)
        return BufferRole::data;
    if (fit->second == bit->second.data_end_field)
        return BufferRole::data_end;
    return BufferRole::other;
}

std::string NetSpec::action_name(const std::string& hook, int64_t code) const {
    auto hit = actions.find(hook);
    if (hit == actions.end())
        return "unknown";
    auto cit = hit->second.find(code);
    if (cit == hit->second.end())
        return "unknown";
    return cit->second;
}

std::string NetSpec::helper_name(int64_t id) const {
    auto it = helpers.find(id);
    if (it == helpers.end())
        return "unknown@" + std::to_string(id);
    return it->second;
}

const HookSpec& NetSpec::hook(const std::string& name) const {
    auto it = hooks.find(name);
    if (it == hooks.end())
        fail(errc::spec_parse_error, "unknown hook '" + name + "'");
    return it->second;
}

NetSpec parse_netspec(const std::string& text) {
    NetSpec spec;
    enum class Section { none, protocol, buffer, helpers, actions };
    Section section = Section::none;
    ProtocolSpec* proto = nullptr;
    BufferSpec* buffer = nullptr;
    std::map<int64_t, std::string>* action_table = nullptr;
    size_t proto_line = 0;

    std::istringstream in(text);
    std::string raw;
    size_t lineno = 0;
    auto finish_protocol = [&] {
        if (proto != nullptr)
            validate_protocol(*proto, proto_line);
        proto = nullptr;
    };
    auto finish_buffer = [&] {
        if (buffer != nullptr && (buffer->data_field.empty() || buffer->data_end_field.empty()))
            fail(errc::missing_data_role, "buffer " + buffer->name + " lacks a data/data_end role");
        buffer = nullptr;
    };
    while (std::getline(in, raw)) {
        ++lineno;
        if (auto hash = raw.find('#'); hash != std::string::npos)
            raw.erase(hash);
        std::vector<std::string> tok = split_ws(raw);
        if (tok.empty())
            continue;
        if (tok[0].front() == '[') {
            std::string joined = raw.substr(raw.find('['));
            if (joined.back() != ']')
                spec_err(lineno, "unterminated section header");
            joined = joined.substr(1, joined.size() - 2);
            std::vector<std::string> head = split_ws(joined);
            finish_protocol();
            finish_buffer();
            action_table = nullptr;
            if (head.empty())
                spec_err(lineno, "empty section header");
            if (head[0] == "protocol") {
                if (head.size() != 3)
                    spec_err(lineno, "expected [protocol <name> len=<n>]");
                auto [k, v] = split_kv(head[2], lineno);
                if (k != "len")
                    spec_err(lineno, "expected len=<n>");
                if (spec.protocols.count(head[1]))
                    spec_err(lineno, "duplicate protocol '" + head[1] + "'");
                ProtocolSpec& p = spec.protocols[head[1]];
                p.name = head[1];
                p.header_len = static_cast<int>(parse_int(v, lineno));
                if (p.header_len <= 0)
                    spec_err(lineno, "protocol length must be positive");
                proto = &p;
                proto_line = lineno;
                section = Section::protocol;
            } else if (head[0] == "buffer") {
                if (head.size() != 2)
                    spec_err(lineno, "expected [buffer <name>]");
                if (spec.buffers.count(head[1]))
                    spec_err(lineno, "duplicate buffer '" + head[1] + "'");
                BufferSpec& b = spec.buffers[head[1]];
                b.name = head[1];
                buffer = &b;
                section = Section::buffer;
            } else if (head[0] == "helpers") {
                section = Section::helpers;
            } else if (head[0] == "actions") {
                if (head.size() != 2)
                    spec_err(lineno, "expected [actions <hook>]");
                action_table = &spec.actions[head[1]];
                section = Section::actions;
            } else if (head[0] == "hook") {
                if (head.size() != 4)
                    spec_err(lineno, "expected [hook <name> buffer=<b> proto=<p>]");
                HookSpec h;
                h.name = head[1];
                auto [bk, bv] = split_kv(head[2], lineno);
                auto [pk, pv] = split_kv(head[3], lineno);
                if (bk != "buffer" || pk != "proto")
                    spec_err(lineno, "expected buffer=<b> proto=<p>");
                h.buffer = bv;
                h.initial_proto = pv;
                if (spec.hooks.count(h.name))
                    spec_err(lineno, "duplicate hook '" + h.name + "'");
                spec.hooks[h.name] = h;
                section = Section::none;
            } else {
                spec_err(lineno, "unknown section '" + head[0] + "'");
            }
            continue;
        }
        switch (section) {
        case Section::protocol: {
            if (tok[0] == "field") {
                if (tok.size() != 4)
                    spec_err(lineno, "expected field <off> <width> <name>");
                int off = static_cast<int>(parse_int(tok[1], lineno));
                int width = static_cast<int>(parse_int(tok[2], lineno));
                if (proto->fields.count(off))
                    spec_err(lineno, "duplicate field offset " + tok[1]);
                for (const auto& [o, f] : proto->fields)
                    if (f.name == tok[3])
                        spec_err(lineno, "duplicate field name '" + tok[3] + "'");
                proto->fields[off] = ProtocolField{tok[3], width};
            } else if (tok[0] == "tail") {
                if (tok.size() != 3)
                    spec_err(lineno, "expected tail <field> <value>=<proto>");
                auto [v, target] = split_kv(tok[2], lineno);
                int64_t value = parse_int(v, lineno);
                auto& table = proto->tail_fields[tok[1]];
                if (table.count(value))
                    spec_err(lineno, "duplicate tail value " + v);
                table[value] = target;
            } else {
                spec_err(lineno, "unexpected '" + tok[0] + "' in protocol section");
            }
            break;
        }
        case Section::buffer: {
            if (tok[0] == "field") {
                if (tok.size() != 3)
                    spec_err(lineno, "expected field <off> <name>");
                int off = static_cast<int>(parse_int(tok[1], lineno));
                if (buffer->fields.count(off))
                    spec_err(lineno, "duplicate field offset " + tok[1]);
                buffer->fields[off] = tok[2];
            } else if (tok[0] == "role") {
                if (tok.size() != 3)
                    spec_err(lineno, "expected role data=<f> data_end=<f>");
                auto [dk, dv] = split_kv(tok[1], lineno);
                auto [ek, ev] = split_kv(tok[2], lineno);
                if (dk != "data" || ek != "data_end")
                    spec_err(lineno, "expected role data=<f> data_end=<f>");
                bool have_d = false, have_e = false;
                for (const auto& [o, n] : buffer->fields) {
                    have_d = have_d || n == dv;
                    have_e = have_e || n == ev;
                }
                if (!have_d || !have_e)
                    spec_err(lineno, "role names an undeclared field");
                buffer->data_field = dv;
                buffer->data_end_field = ev;
            } else {
                spec_err(lineno, "unexpected '" + tok[0] + "' in buffer section");
            }
            break;
        }
        case Section::helpers: {
            if (tok.size() != 2)
                spec_err(lineno, "expected <id> <name>");
            int64_t id = parse_int(tok[0], lineno);
            if (spec.helpers.count(id))
                spec_err(lineno, "duplicate helper id " + tok[0]);
            spec.helpers[id] = tok[1];
            break;
        }
        case Section::actions: {
            if (tok.size() != 2)
                spec_err(lineno, "expected <code> <name>");
            int64_t code = parse_int(tok[0], lineno);
            if (action_table->count(code))
                spec_err(lineno, "duplicate action code " + tok[0]);
            (*action_table)[code] = tok[1];
            break;
        }
        case Section::none:
            spec_err(lineno, "content outside any section");
        }
    }
    finish_protocol();
    finish_buffer();

    for (const auto& [name, p] : spec.protocols)
        for (const auto& [fname, values] : p.tail_fields)
            for (const auto& [value, target] : values)
                if (!spec.protocols.count(target))
                    fail(errc::spec_parse_error,
                         "tail of " + name + "." + fname + " targets unknown protocol '" + target + "'");
    for (const auto& [name, h] : spec.hooks) {
        if (!spec.buffers.count(h.buffer))
            fail(errc::spec_parse_error, "hook " + name + " uses unknown buffer '" + h.buffer + "'");
        if (!spec.protocols.count(h.initial_proto))
            fail(errc::spec_parse_error, "hook " + name + " uses unknown protocol '" + h.initial_proto + "'");
    }
    return spec;
}

NetSpec load_netspec(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        fail(errc::io_error, "cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_netspec(buf.str());
}

std::string serialize_netspec(const NetSpec& spec) {
    std::ostringstream os;
    os << "# Network protocol and hook registry.\n";
    os << "# Offsets and widths are bytes; selector values are decimal.\n";
    for (const auto& [name, p] : spec.protocols) {
        os << "\n[protocol " << name << " len=" << p.header_len << "]\n";
        for (const auto& [off, f] : p.fields)
            os << "field " << off << " " << f.width << " " << f.name << "\n";
        for (const auto& [fname, values] : p.tail_fields)
            for (const auto& [value, target] : values)
                os << "tail " << fname << " " << value << "=" << target << "\n";
    }
    for (const auto& [name, b] : spec.buffers) {
        os << "\n[buffer " << name << "]\n";
        for (const auto& [off, fname] : b.fields)
            os << "field " << off << " " << fname << "\n";
        os << "role data=" << b.data_field << " data_end=" << b.data_end_field << "\n";
    }
    if (!spec.helpers.empty()) {
        os << "\n[helpers]\n";
        for (const auto& [id, name] : spec.helpers)
            os << id << " " << name << "\n";
    }
    for (const auto& [hook, table] : spec.actions) {
        os << "\n[actions " << hook << "]\n";
        for (const auto& [code, name] : table)
            os << code << " " << name << "\n";
    }
    for (const auto& [name, h] : spec.hooks)
        os << "\n[hook " << name << " buffer=" << h.buffer << " proto=" << h.initial_proto << "]\n";
    return os.str();
}

} // namespace prashna
