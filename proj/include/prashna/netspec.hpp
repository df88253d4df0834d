// SPDX-License-Identifier: MIT
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

namespace prashna {

struct ProtocolField {
    std::string name;
    int width = 0;
};

struct ProtocolSpec {
    std::string name;
    int header_len = 0;
    std::map<int, ProtocolField> fields; // keyed by offset within the header
    // field name -> selector value -> successor protocol
    std::map<std::string, std::map<int64_t, std::string>> tail_fields;
};

struct BufferSpec {
    std::string name;
    std::map<int, std::string> fields; // offset -> field name
    std::string data_field;
    std::string data_end_field;
};

struct HookSpec {
    std::string name;
    std::string buffer;
    std::string initial_proto;
};

// Role a context-buffer field plays for packet access.
enum class BufferRole { data, data_end, other };

class NetSpec {
  public:
    std::map<std::string, ProtocolSpec> protocols;
    std::map<std::string, BufferSpec> buffers;
    std::map<int64_t, std::string> helpers;
    std::map<std::string, std::map<int64_t, std::string>> actions; // hook -> code -> name
    std::map<std::string, HookSpec> hooks;

    // Qualified name of the header field covering `rel_off`, e.g. "ipv4.dst";
    // offsets outside any declared field yield "<proto>.unknown@<rel_off>".
    std::string hdr_field_name(const std::string& proto, int64_t rel_off) const;

    // Successor protocol selected when `field` (short name) of `proto` equals
    // `value`; nullopt when the pair selects nothing.
    std::optional<std::string> next_proto(const std::string& proto, const std::string& field,
                                          int64_t value) const;

    bool is_tail_field(const std::string& proto, const std::string& field) const;

    int header_len(const std::string& proto) const;

    std::string buff_field_name(const std::string& buffer, int64_t off) const;

    BufferRole buffer_role(const std::string& buffer, int64_t off) const;

    std::string action_name(const std::string& hook, int64_t code) const;

    std::string helper_name(int64_t id) const;

    const HookSpec& hook(const std::string& name) const;
};

NetSpec parse_netspec(const std::string& text);
NetSpec load_netspec(const std::string& path);
std::string serialize_netspec(const NetSpec& spec);

} // namespace prashna
