macro_rules! example {
    ($name:ident) => {
        mod $name {
            include!(concat!(
                env!("CARGO_MANIFEST_DIR"),
                "/examples/",
                stringify!($name),
                ".rs"
            ));
        }

        #[test]
        fn $name() {
            $name::run().expect(concat!(stringify!($name), " should run"));
        }
    };
}

example!(synth_quotes);
example!(qrm_window);
example!(split_criteria);
example!(gradient_boosting);
example!(random_forest);
example!(hyperparameter_search);
example!(end_to_end);
