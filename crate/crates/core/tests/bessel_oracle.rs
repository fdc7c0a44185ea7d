// Reference values computed once in 25-30 digit arithmetic with mpmath:
// besselk for K_ν, and for the tail the representation
// ∫_0^∞ exp(-x cosh s) cosh(5s/3) / cosh s ds.

use rr_core::bessel::{bessel_k, bessel_k53_tail, BesselOrder};

const K13: &[(f64, f64)] = &[
    (1e-8, 783.322_906_243_085_74),
    (1e-4, 36.283_960_701_007_622),
    (0.01, 7.486_224_666_451_234_9),
    (0.5, 0.989_031_074_246_724_29),
    (1.0, 0.438_430_633_441_534_36),
    (1.9, 0.131_980_196_600_278_3),
    (2.0, 0.116_544_961_296_165_25),
    (2.5, 0.063_542_537_454_733_37),
    (5.0, 0.003_728_875_096_053_588_4),
    (10.0, 1.787_460_827_105_533_5e-5),
    (25.0, 3.471_720_142_490_706_4e-12),
    (29.9, 2.364_977_318_252_131_2e-14),
    (30.0, 2.136_366_473_661_119_2e-14),
    (50.0, 3.413_921_781_358_362_8e-23),
    (100.0, 4.659_203_157_021_346_2e-45),
    (300.0, 3.724_383_346_421_041_7e-132),
    (700.0, 4.670_146_799_224_167_9e-306),
];

const K23: &[(f64, f64)] = &[
    (1e-8, 231_550.910_532_380_8),
    (1e-4, 498.858_591_004_311_04),
    (0.01, 23.098_077_342_226_278),
    (0.5, 1.205_930_464_720_335_7),
    (1.0, 0.494_475_062_104_208_27),
    (1.9, 0.141_802_687_086_594_32),
    (2.0, 0.124_838_927_488_128_31),
    (2.5, 0.067_255_322_171_623_334),
    (5.0, 0.003_844_424_634_496_821_3),
    (10.0, 1.816_118_756_953_020_4e-5),
    (25.0, 3.494_493_749_848_861e-12),
    (29.9, 2.377_982_166_538_959_1e-14),
    (30.0, 2.148_075_564_557_772e-14),
    (50.0, 3.425_208_530_143_374_6e-23),
    (100.0, 4.666_936_458_728_046_7e-45),
    (300.0, 3.726_449_584_058_084_4e-132),
    (700.0, 4.671_258_078_012_851_4e-306),
];

const K53: &[(f64, f64)] = &[
    (1e-8, 30_873_454_738_434.096),
    (1e-4, 6_651_484.164_018_181_6),
    (0.01, 3_087.229_870_296_621_6),
    (0.5, 4.204_845_646_834_286_2),
    (1.0, 1.097_730_716_247_145_4),
    (1.9, 0.231_490_854_204_905_89),
    (2.0, 0.199_770_912_954_917_46),
    (2.5, 0.099_412_042_612_932_481),
    (5.0, 0.004_754_054_998_586_074_1),
    (10.0, 2.029_609_994_699_269_5e-5),
    (25.0, 3.658_093_142_482_645_7e-12),
    (29.9, 2.471_018_886_436_700_1e-14),
    (30.0, 2.231_836_498_752_575_7e-14),
    (50.0, 3.505_260_675_495_519_5e-23),
    (100.0, 4.721_428_976_471_053_5e-45),
    (300.0, 3.740_945_344_572_411e-132),
    (700.0, 4.679_044_433_658_478_1e-306),
];

const TAIL: &[(f64, f64)] = &[
    (1e-8, 463_100.007_277_147_23),
    (1e-6, 21_493.468_615_984_583),
    (1e-4, 995.908_830_850_667_48),
    (0.01, 44.497_250_411_421_062),
    (0.5, 1.741_638_293_750_937_7),
    (1.0, 0.651_422_815_355_363_97),
    (2.0, 0.150_817_951_425_369_7),
    (5.0, 0.004_249_625_954_996_396_9),
    (10.0, 1.922_382_643_008_689_7e-5),
    (29.9, 2.428_537_945_643_959e-14),
    (30.0, 2.193_598_185_902_566_5e-14),
    (50.0, 3.469_570_407_953_187_6e-23),
    (100.0, 4.697_593_665_922_171_9e-45),
    (300.0, 3.734_689_510_443_945_2e-132),
    (700.0, 4.675_697_395_052_980_7e-306),
];

fn check(order: BesselOrder, table: &[(f64, f64)]) {
    for &(x, want) in table {
        let got = bessel_k(order, x).unwrap();
        let err = (got / want - 1.0).abs();
        assert!(err <= 1e-10, "K_{:?}({x}) = {got:e}, want {want:e}, rel {err:e}", order);
    }
}

#[test]
fn k_one_third() {
    check(BesselOrder::OneThird, K13);
}

#[test]
fn k_two_thirds() {
    check(BesselOrder::TwoThirds, K23);
}

#[test]
fn k_five_thirds() {
    check(BesselOrder::FiveThirds, K53);
}

#[test]
fn k53_tail() {
    for &(x, want) in TAIL {
        let got = bessel_k53_tail(x).unwrap();
        let err = (got / want - 1.0).abs();
        assert!(err <= 1e-8, "tail({x}) = {got:e}, want {want:e}, rel {err:e}");
    }
}
