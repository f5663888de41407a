#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "soundbench/core.hpp"

namespace sb {

// Mono clip, samples normalized to [-1, 1). Division by 32768 keeps the
// domain symmetric and branch-free.
struct AudioClip {
    std::vector<double> samples;
    int sample_rate = 0;
    int label = 0;  // class id in {1..C}, 0 when unknown
    std::string clip_id;

    double duration_seconds() const {
        return static_cast<double>(samples.size()) / sample_rate;
    }
};

namespace detail {

inline std::uint32_t read_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    return b[0] | (b[1] << 8) | (b[2] << 16) | (std::uint32_t(b[3]) << 24);
}

inline std::uint16_t read_u16(std::istream& in) {
    unsigned char b[2];
    in.read(reinterpret_cast<char*>(b), 2);
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

inline void write_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<char*>(b), 4);
}

inline void write_u16(std::ostream& out, std::uint16_t v) {
    unsigned char b[2] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8)};
    out.write(reinterpret_cast<char*>(b), 2);
}

}  // namespace detail

// Reads a RIFF/WAVE file. Only PCM, mono, 16-bit little-endian is accepted.
inline AudioClip load_wav(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open wav file: " + path);

    char tag[4];
    in.read(tag, 4);
    if (!in || std::memcmp(tag, "RIFF", 4) != 0)
        throw FormatError(path + ": missing RIFF header");
    detail::read_u32(in);  // riff size
    in.read(tag, 4);
    if (!in || std::memcmp(tag, "WAVE", 4) != 0)
        throw FormatError(path + ": missing WAVE tag");

    bool have_fmt = false;
    std::uint16_t channels = 0, bits = 0, audio_format = 0;
    std::uint32_t rate = 0;
    std::vector<std::int16_t> pcm;
    bool have_data = false;

    while (in.read(tag, 4)) {
        std::uint32_t chunk_size = detail::read_u32(in);
        if (!in) throw FormatError(path + ": truncated chunk header");
        if (std::memcmp(tag, "fmt ", 4) == 0) {
            if (chunk_size < 16) throw FormatError(path + ": fmt chunk too small");
            audio_format = detail::read_u16(in);
            channels = detail::read_u16(in);
            rate = detail::read_u32(in);
            detail::read_u32(in);  // byte rate
            detail::read_u16(in);  // block align
            bits = detail::read_u16(in);
            in.ignore(chunk_size - 16);
            have_fmt = true;
        } else if (std::memcmp(tag, "data", 4) == 0) {
            if (!have_fmt) throw FormatError(path + ": data chunk before fmt");
            if (audio_format != 1)
                throw FormatError(path + ": audio_format=" + std::to_string(audio_format) +
                                  " unsupported (PCM required)");
            if (channels != 1)
                throw FormatError(path + ": channels=" + std::to_string(channels) + " unsupported");
            if (bits != 16)
                throw FormatError(path + ": bits_per_sample=" + std::to_string(bits) +
                                  " unsupported");
            std::size_t n = chunk_size / 2;
            pcm.resize(n);
            in.read(reinterpret_cast<char*>(pcm.data()), static_cast<std::streamsize>(n * 2));
            if (static_cast<std::size_t>(in.gcount()) != n * 2)
                throw FormatError(path + ": truncated data chunk");
            have_data = true;
            break;
        } else {
            in.ignore(chunk_size + (chunk_size & 1));
        }
    }
    if (!have_data) throw FormatError(path + ": no data chunk");
    if (pcm.empty()) throw FormatError(path + ": empty data chunk");

    AudioClip clip;
    clip.sample_rate = static_cast<int>(rate);
    clip.clip_id = path;
    clip.samples.resize(pcm.size());
    for (std::size_t i = 0; i < pcm.size(); ++i) clip.samples[i] = pcm[i] / 32768.0;
    return clip;
}

// Writes 16-bit PCM mono. Samples are quantized with the inverse of the
// load_wav normalization, so a load/store round trip is bit exact.
inline void write_wav(const std::string& path, const AudioClip& clip) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write wav file: " + path);
    std::uint32_t n = static_cast<std::uint32_t>(clip.samples.size());
    std::uint32_t data_bytes = n * 2;
    out.write("RIFF", 4);
    detail::write_u32(out, 36 + data_bytes);
    out.write("WAVE", 4);
    out.write("fmt ", 4);
    detail::write_u32(out, 16);
    detail::write_u16(out, 1);  // PCM
    detail::write_u16(out, 1);  // mono
    detail::write_u32(out, static_cast<std::uint32_t>(clip.sample_rate));
    detail::write_u32(out, static_cast<std::uint32_t>(clip.sample_rate) * 2);
    detail::write_u16(out, 2);
    detail::write_u16(out, 16);
    out.write("data", 4);
    detail::write_u32(out, data_bytes);
    for (double s : clip.samples) {
        double scaled = s * 32768.0;
        if (scaled > 32767.0) scaled = 32767.0;
        if (scaled < -32768.0) scaled = -32768.0;
        std::int16_t q = static_cast<std::int16_t>(std::lrint(scaled));
        detail::write_u16(out, static_cast<std::uint16_t>(q));
    }
}

// 10*log10(P_clip / P_noise), P being the mean squared sample.
inline double compute_snr(const AudioClip& clip, const AudioClip& noise) {
    auto mean_power = [](const std::vector<double>& s) {
        double p = 0.0;
        for (double x : s) p += x * x;
        return p / static_cast<double>(s.size());
    };
    double pn = mean_power(noise.samples);
    if (pn == 0.0) throw ConfigError("noise reference silent");
    return 10.0 * std::log10(mean_power(clip.samples) / pn);
}

}  // namespace sb
