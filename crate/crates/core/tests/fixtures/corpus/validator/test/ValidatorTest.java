public class ValidatorTest {
    public static void main(String[] args) {
        if (Validator.area(3, 4) != 12) {
            System.out.println("FAIL area");
            System.exit(1);
        }
        boolean thrown = false;
        try {
            Validator.area(0, 4);
        } catch (IllegalArgumentException e) {
            thrown = true;
        }
        if (!thrown) {
            System.out.println("FAIL width");
            System.exit(1);
        }
        thrown = false;
        try {
            Validator.area(4, -1);
        } catch (IllegalArgumentException e) {
            thrown = true;
        }
        if (!thrown) {
            System.out.println("FAIL height");
            System.exit(1);
        }
        System.out.println("OK");
    }
}
