//! Every runnable example also runs as a test.

macro_rules! example {
    ($name:ident) => {
        mod $name {
            include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/", stringify!($name), ".rs"));

            #[test]
            fn runs() {
                main().expect(concat!(stringify!($name), " example runs"));
            }
        }
    };
}

example!(asymptotic_series);
example!(command_line);
example!(double_scaling);
example!(dyson_constant);
example!(forward_recursion);
example!(integral_representation);
example!(ladder_identities);
example!(laguerre_correspondence);
example!(moment_table);
example!(painleve_integration);
example!(recurrence_coefficients);
example!(sigma_form);
