mod mix;
mod pairs;
mod rng;
mod room;
mod spec;

pub use mix::{mix_at_snr, GainPolicy, Mixture, DEFAULT_PEAK_TARGET, FLAG_CLIPPED};
pub use pairs::{
    bandwidth_augment, make_enhancement_pair, make_separation_mixture, make_sr_pair, realize,
    AssetSource, BandwidthAugment, BandwidthBranch, EnhancementPair, RealizeOptions, Realized,
    SeparationMixture, SrPair, TargetPolicy, DEFAULT_REVERB_FRACTION, SR_CUTOFF_RANGE_HZ,
    SR_RATE_HZ,
};
pub use rng::{derive_seed, splitmix64, SimRng, RNG_ALGORITHM};
pub use room::{
    generate_rir, rt60_to_reflection, sabine_reflection, schroeder_rt60, RoomSpec, Walls,
    DEFAULT_SOUND_SPEED_MPS,
};
pub use spec::{MixtureKind, MixtureSpec, SCHEMA_VERSION};
