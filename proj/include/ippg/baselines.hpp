#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ippg/estimation.hpp"
#include "ippg/filter.hpp"
#include "ippg/region_series.hpp"
#include "ippg/waveform.hpp"

namespace ippg {

/// Chrominance pulse of one region of an RGB series (channels R, G, B).
/// Channels are divided by their temporal mean; when `bandpass` is given
/// both chrominance signals are filtered before they are combined.
/// Constant channels give a zero waveform.
/// Throws SentinelInWindow, ShapeMismatch (not RGB), ZeroStd (a zero-mean channel).
PulseWaveform chrom_waveform(const RegionSeries& rgb, std::size_t region,
                             const IirFilter* bandpass = nullptr);

/// Plane-orthogonal-to-skin pulse with 1.6 s overlap-added windows; inputs
/// shorter than one window are processed as a single window. Errors as chrom_waveform.
PulseWaveform pos_waveform(const RegionSeries& rgb, std::size_t region);

/// Sums the in-band power spectra of the included regions and returns the
/// peak. `excluded[r]` nonzero drops region r. Throws AllRegionsExcluded,
/// MismatchedRates, ShapeMismatch (unequal lengths).
HrEstimate aggregate_region_hr(std::span<const PulseWaveform> regions,
                               std::span<const std::uint8_t> excluded = {}, HrBand band = {});

enum class BaselineMethod { Chrom, Pos };

/// Runs a baseline on every sentinel-free region of the series and
/// aggregates their spectra.
HrEstimate baseline_hr(const RegionSeries& rgb, BaselineMethod method,
                       const IirFilter* bandpass = nullptr, HrBand band = {});

}  // namespace ippg
