#ifndef VOICEBENCH_H
#define VOICEBENCH_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every exported function.
typedef enum VbStatus {
  VB_STATUS_OK = 0,
  VB_STATUS_NULL_POINTER = 1,
  VB_STATUS_INVALID_ARGUMENT = 2,
  VB_STATUS_IO = 3,
  VB_STATUS_FORMAT = 4,
  VB_STATUS_UNKNOWN_METRIC = 5,
  VB_STATUS_SIGNAL = 6,
  VB_STATUS_CONFIG = 7,
  VB_STATUS_PANIC = 99,
} VbStatus;

// Opaque audio buffer.
typedef struct VbAudio VbAudio;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *vb_version(void);

// Message of the last failure on this thread, or NULL. Valid until the
// next failing call on the same thread.
const char *vb_last_error_message(void);

// Copies `frames * channels` planar samples (channel after channel) into a new buffer.
//
// # Safety
// `samples` must point to `frames * channels` doubles; `out` must be writable.
enum VbStatus vb_audio_from_samples(const double *samples,
                                    size_t frames,
                                    uint32_t channels,
                                    uint32_t sample_rate_hz,
                                    struct VbAudio **out_audio);

// Reads a WAV file.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum VbStatus vb_audio_read_wav(const char *path, struct VbAudio **out_audio);

// Writes a 32-bit float WAV file.
//
// # Safety
// `audio` must be a live handle and `path` a NUL-terminated string.
enum VbStatus vb_audio_write_wav(const struct VbAudio *audio, const char *path);

// Releases a handle. NULL is ignored.
//
// # Safety
// `audio` must come from this library and not be used afterwards.
void vb_audio_free(struct VbAudio *audio);

// # Safety
// `audio` must be a live handle or NULL.
size_t vb_audio_frames(const struct VbAudio *audio);

// # Safety
// `audio` must be a live handle or NULL.
uint32_t vb_audio_channels(const struct VbAudio *audio);

// # Safety
// `audio` must be a live handle or NULL.
uint32_t vb_audio_sample_rate(const struct VbAudio *audio);

// Copies planar samples into `dst`. Fails with `INVALID_ARGUMENT` when
// `capacity` is smaller than `frames * channels`; `written` then holds the
// required size.
//
// # Safety
// `dst` must hold `capacity` doubles; `written` must be writable.
enum VbStatus vb_audio_copy_samples(const struct VbAudio *audio,
                                    double *dst,
                                    size_t capacity,
                                    size_t *written);

// Scores one metric by name (`snr`, `si_snr`, `si_snri`, `lsd`, `stoi`,
// `mcd`, `bss_sdr`, `bss_sir`, `bss_sar`, `lufs`). `mixture` may be NULL
// unless the metric needs it.
//
// # Safety
// Handles must be live (or NULL for `mixture`); `name` NUL-terminated.
enum VbStatus vb_metric(const char *name,
                        const struct VbAudio *reference,
                        const struct VbAudio *estimate,
                        const struct VbAudio *mixture,
                        double *value);

// Integrated loudness in LUFS.
//
// # Safety
// `audio` must be a live handle; `value` writable.
enum VbStatus vb_loudness_lufs(const struct VbAudio *audio, double *value);

// Resamples to `sample_rate_hz` into a new handle.
//
// # Safety
// `audio` must be a live handle; `out_audio` writable.
enum VbStatus vb_resample(const struct VbAudio *audio,
                          uint32_t sample_rate_hz,
                          struct VbAudio **out_audio);

// Image-source RIR of a shoebox room with uniform walls tuned to `rt60_s`.
//
// # Safety
// `room_dims`, `source` and `mic` must each point to 3 doubles (metres).
enum VbStatus vb_rir(const double *room_dims,
                     const double *source,
                     const double *mic,
                     double rt60_s,
                     uint32_t sample_rate_hz,
                     struct VbAudio **out_audio);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* VOICEBENCH_H */
