package testcases.CWE89_SQL_Injection;

import testcasesupport.*;

public class CWE89_SQL_Injection__Environment_61a extends AbstractTestCase
{
    public void bad() throws Throwable
    {
        String data = (new CWE89_SQL_Injection__Environment_61b()).badSource();
        IO.writeLine(data);
    }

    public void good() throws Throwable
    {
        String data = (new CWE89_SQL_Injection__Environment_61b()).goodG2BSource();
        IO.writeLine(data);
    }
}
